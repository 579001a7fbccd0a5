//! Node kinematics inside a square area.
//!
//! Three models: a leg-based 2-D random walk, random waypoint with pauses,
//! and Gauss-Markov with per-interval speed/heading memory. Random walk and
//! Gauss-Markov reflect specularly off the walls; random waypoint only ever
//! targets interior points.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MobilityModel {
    RandomWalk2D,
    RandomWaypoint,
    GaussMarkov,
}

impl MobilityModel {
    pub fn as_str(self) -> &'static str {
        match self {
            MobilityModel::RandomWalk2D => "random_walk",
            MobilityModel::RandomWaypoint => "random_waypoint",
            MobilityModel::GaussMarkov => "gauss_markov",
        }
    }
}

impl FromStr for MobilityModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "random_walk" | "randomwalk2d" | "random_walk_2d" | "rw" => Ok(Self::RandomWalk2D),
            "random_waypoint" | "randomwaypoint" | "rwp" => Ok(Self::RandomWaypoint),
            "gauss_markov" | "gaussmarkov" | "gm" => Ok(Self::GaussMarkov),
            _ => Err(format!("unknown mobility model `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityParams {
    pub model: MobilityModel,
    pub v_min: f64,
    pub v_max: f64,
    /// Random walk leg length in meters.
    pub leg_distance: f64,
    /// Random waypoint pause at each waypoint, seconds.
    pub pause_time: f64,
    /// Gauss-Markov memory in [0, 1].
    pub alpha: f64,
    pub gm_update_interval: f64,
    /// Defaults to the midpoint of `[v_min, v_max]`.
    pub gm_mean_speed: Option<f64>,
    pub gm_speed_sigma: f64,
    pub gm_dir_sigma: f64,
    /// Engine tick between position updates, seconds.
    pub tick: f64,
}

impl Default for MobilityParams {
    fn default() -> Self {
        Self {
            model: MobilityModel::RandomWalk2D,
            v_min: 2.0,
            v_max: 4.0,
            leg_distance: 30.0,
            pause_time: 2.0,
            alpha: 0.75,
            gm_update_interval: 1.0,
            gm_mean_speed: None,
            gm_speed_sigma: 0.5,
            gm_dir_sigma: 0.4,
            tick: 0.1,
        }
    }
}

impl MobilityParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.v_min > 0.0) || !(self.v_min <= self.v_max) {
            return bad("mobility requires 0 < v_min <= v_max");
        }
        if !(self.leg_distance > 0.0) {
            return bad("mobility.leg_distance must be positive");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("mobility.alpha must lie in [0, 1]");
        }
        if !(self.pause_time >= 0.0) {
            return bad("mobility.pause_time must be non-negative");
        }
        if !(self.gm_update_interval > 0.0) || !(self.tick > 0.0) {
            return bad("mobility intervals must be positive");
        }
        if !(self.gm_speed_sigma >= 0.0) || !(self.gm_dir_sigma >= 0.0) {
            return bad("gauss-markov sigmas must be non-negative");
        }
        if self.gm_mean_speed.is_some_and(|v| !(v > 0.0)) {
            return bad("mobility.gm_mean_speed must be positive");
        }
        Ok(())
    }

    pub fn mean_speed(&self) -> f64 {
        self.gm_mean_speed
            .unwrap_or(0.5 * (self.v_min + self.v_max))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionState {
    pub x: f64,
    pub y: f64,
    /// Radians in [0, 2π).
    pub heading: f64,
    pub speed: f64,
    pub leg_remaining: f64,
    pub waypoint: (f64, f64),
    pub pause_remaining: f64,
    /// Gauss-Markov steering target.
    pub mean_heading: f64,
    /// Seconds until the next Gauss-Markov update.
    pub next_update: f64,
}

/// Mobility model bound to a square area of side `side`.
#[derive(Debug, Clone, Copy)]
pub struct Mobility {
    pub params: MobilityParams,
    pub side: f64,
}

fn uniform_speed(p: &MobilityParams, rng: &mut impl Rng) -> f64 {
    if p.v_max > p.v_min {
        rng.random_range(p.v_min..=p.v_max)
    } else {
        p.v_min
    }
}

fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wraps into (-π, π].
fn wrap_pi(a: f64) -> f64 {
    let r = normalize_angle(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Straight-line move with specular reflection at the walls.
fn move_reflecting(x: f64, y: f64, heading: f64, dist: f64, side: f64) -> (f64, f64, f64) {
    let (sin, cos) = heading.sin_cos();
    let (mut nx, mut ny) = (x + dist * cos, y + dist * sin);
    let (mut flip_x, mut flip_y) = (false, false);
    while nx < 0.0 || nx > side {
        if nx < 0.0 {
            nx = -nx;
        } else {
            nx = 2.0 * side - nx;
        }
        flip_x = !flip_x;
    }
    while ny < 0.0 || ny > side {
        if ny < 0.0 {
            ny = -ny;
        } else {
            ny = 2.0 * side - ny;
        }
        flip_y = !flip_y;
    }
    let mut h = heading;
    if flip_x {
        h = PI - h;
    }
    if flip_y {
        h = -h;
    }
    (nx.clamp(0.0, side), ny.clamp(0.0, side), normalize_angle(h))
}

impl Mobility {
    pub fn new(params: MobilityParams, side: f64) -> Self {
        Self { params, side }
    }

    /// I.i.d. uniform positions, each with a freshly drawn leg or waypoint.
    pub fn init_positions(&self, n: usize, rng: &mut impl Rng) -> Vec<MotionState> {
        (0..n).map(|_| self.init_one(rng)).collect()
    }

    pub fn init_one(&self, rng: &mut impl Rng) -> MotionState {
        let p = &self.params;
        let x = rng.random_range(0.0..=self.side);
        let y = rng.random_range(0.0..=self.side);
        let heading = rng.random_range(0.0..TAU);
        let mut s = MotionState {
            x,
            y,
            heading,
            speed: uniform_speed(p, rng),
            leg_remaining: p.leg_distance,
            waypoint: (x, y),
            pause_remaining: 0.0,
            mean_heading: heading,
            next_update: p.gm_update_interval,
        };
        match p.model {
            MobilityModel::RandomWalk2D => {}
            MobilityModel::RandomWaypoint => {
                s.waypoint = (
                    rng.random_range(0.0..=self.side),
                    rng.random_range(0.0..=self.side),
                );
            }
            MobilityModel::GaussMarkov => {
                s.mean_heading = rng.random_range(0.0..TAU);
            }
        }
        s
    }

    pub fn advance(&self, state: &mut MotionState, dt: f64, rng: &mut impl Rng) {
        match self.params.model {
            MobilityModel::RandomWalk2D => self.advance_random_walk(state, dt, rng),
            MobilityModel::RandomWaypoint => self.advance_random_waypoint(state, dt, rng),
            MobilityModel::GaussMarkov => self.advance_gauss_markov(state, dt, rng),
        }
    }

    pub fn advance_random_walk(&self, s: &mut MotionState, dt: f64, rng: &mut impl Rng) {
        let mut left = dt;
        while left > 0.0 {
            let to_leg_end = s.leg_remaining / s.speed;
            if to_leg_end > left {
                self.straight(s, s.speed * left);
                s.leg_remaining -= s.speed * left;
                return;
            }
            self.straight(s, s.leg_remaining);
            left -= to_leg_end;
            s.heading = rng.random_range(0.0..TAU);
            s.speed = uniform_speed(&self.params, rng);
            s.leg_remaining = self.params.leg_distance;
        }
    }

    pub fn advance_random_waypoint(&self, s: &mut MotionState, dt: f64, rng: &mut impl Rng) {
        let mut left = dt;
        while left > 0.0 {
            if s.pause_remaining > 0.0 {
                if s.pause_remaining > left {
                    s.pause_remaining -= left;
                    return;
                }
                left -= s.pause_remaining;
                s.pause_remaining = 0.0;
                self.next_waypoint(s, rng);
                continue;
            }
            let (dx, dy) = (s.waypoint.0 - s.x, s.waypoint.1 - s.y);
            let dist = dx.hypot(dy);
            let to_arrival = dist / s.speed;
            if to_arrival > left {
                let f = s.speed * left / dist;
                s.x += dx * f;
                s.y += dy * f;
                return;
            }
            s.x = s.waypoint.0;
            s.y = s.waypoint.1;
            left -= to_arrival;
            if self.params.pause_time > 0.0 {
                s.pause_remaining = self.params.pause_time;
            } else {
                self.next_waypoint(s, rng);
            }
        }
    }

    fn next_waypoint(&self, s: &mut MotionState, rng: &mut impl Rng) {
        s.waypoint = (
            rng.random_range(0.0..=self.side),
            rng.random_range(0.0..=self.side),
        );
        s.speed = uniform_speed(&self.params, rng);
        let (dx, dy) = (s.waypoint.0 - s.x, s.waypoint.1 - s.y);
        if dx != 0.0 || dy != 0.0 {
            s.heading = normalize_angle(dy.atan2(dx));
        }
    }

    pub fn advance_gauss_markov(&self, s: &mut MotionState, dt: f64, rng: &mut impl Rng) {
        let mut left = dt;
        while left > 0.0 {
            if s.next_update > left {
                self.straight(s, s.speed * left);
                s.next_update -= left;
                return;
            }
            self.straight(s, s.speed * s.next_update);
            left -= s.next_update;
            self.gauss_markov_update(s, rng);
            s.next_update = self.params.gm_update_interval;
        }
    }

    /// One Gauss-Markov draw of speed and heading.
    pub fn gauss_markov_update(&self, s: &mut MotionState, rng: &mut impl Rng) {
        let p = &self.params;
        let a = p.alpha;
        let noise = (1.0 - a * a).max(0.0).sqrt();

        // steer away from walls: inside the margin, aim at the center
        let margin = 0.1 * self.side;
        if s.x < margin || s.x > self.side - margin || s.y < margin || s.y > self.side - margin {
            let c = 0.5 * self.side;
            s.mean_heading = normalize_angle((c - s.y).atan2(c - s.x));
        }

        let z_speed: f64 = StandardNormal.sample(rng);
        let z_dir: f64 = StandardNormal.sample(rng);
        let speed = a * s.speed + (1.0 - a) * p.mean_speed() + noise * p.gm_speed_sigma * z_speed;
        s.speed = speed.clamp(0.5 * p.v_min, 1.5 * p.v_max);

        let mean = s.heading + wrap_pi(s.mean_heading - s.heading);
        let heading = a * s.heading + (1.0 - a) * mean + noise * p.gm_dir_sigma * z_dir;
        s.heading = normalize_angle(heading);
    }

    fn straight(&self, s: &mut MotionState, dist: f64) {
        if dist <= 0.0 {
            return;
        }
        let (x, y, h) = move_reflecting(s.x, s.y, s.heading, dist, self.side);
        s.x = x;
        s.y = y;
        s.heading = h;
    }
}
