//! Run configuration and its flat `key = value` file format.
//!
//! One key per line, `#` starts a comment. Unknown keys are an error so that
//! typos do not silently fall back to defaults. Every key accepted by
//! [`SimConfig::set`] is listed in `README.md`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobility::{MobilityModel, MobilityParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Lsr,
    Olsr,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Lsr => "lsr",
            Protocol::Olsr => "olsr",
        }
    }
}

/// Which ordered pairs are ledgered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairSample {
    /// All ordered pairs up to [`AUTO_PAIR_THRESHOLD`] nodes, else a fixed sample.
    Auto,
    All,
    Count(usize),
}

pub const AUTO_PAIR_THRESHOLD: usize = 200;
pub const AUTO_PAIR_COUNT: usize = 20_000;

impl PairSample {
    /// Number of ordered pairs to sample for `n` nodes, `None` meaning all.
    pub fn resolve(self, n: usize) -> Option<usize> {
        let total = n * (n - 1);
        let want = match self {
            PairSample::All => return None,
            PairSample::Auto if n <= AUTO_PAIR_THRESHOLD => return None,
            PairSample::Auto => AUTO_PAIR_COUNT,
            PairSample::Count(k) => k,
        };
        (want < total).then_some(want)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OlsrParams {
    pub hello_interval: f64,
    pub tc_interval: f64,
}

impl Default for OlsrParams {
    fn default() -> Self {
        Self {
            hello_interval: 2.0,
            tc_interval: 5.0,
        }
    }
}

/// Control message sizing: `header_bytes + per_id_bytes * listed_ids`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MsgSize {
    pub header_bytes: u32,
    pub per_id_bytes: u32,
}

impl Default for MsgSize {
    fn default() -> Self {
        Self {
            header_bytes: 16,
            per_id_bytes: 4,
        }
    }
}

impl MsgSize {
    pub fn bytes(&self, listed: usize) -> u64 {
        self.header_bytes as u64 + self.per_id_bytes as u64 * listed as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub node_count: usize,
    /// Mean neighbor count the area is sized for.
    pub target_density: f64,
    pub radio_range: f64,
    pub duration: f64,
    /// Leading seconds excluded from every metric.
    pub warmup: f64,
    pub snapshot_interval: f64,
    pub mobility: MobilityParams,
    pub beacon_period: f64,
    pub miss_threshold: u32,
    pub per_hop_delay: (f64, f64),
    /// Per-receiver drop probability for every broadcast.
    pub loss_probability: f64,
    pub protocol: Protocol,
    pub olsr: OlsrParams,
    /// Nominal channel capacity in bits per second.
    pub channel_capacity: f64,
    pub control_msg_size: MsgSize,
    pub pair_sample: PairSample,
    pub seed: u64,
    pub trace_mobility: bool,
    pub trace_link_events: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            node_count: 100,
            target_density: 8.0,
            radio_range: 100.0,
            duration: 180.0,
            warmup: 10.0,
            snapshot_interval: 0.05,
            mobility: MobilityParams::default(),
            beacon_period: 0.5,
            miss_threshold: 3,
            per_hop_delay: (0.001, 0.005),
            loss_probability: 0.0,
            protocol: Protocol::Lsr,
            olsr: OlsrParams::default(),
            channel_capacity: 2_000_000.0,
            control_msg_size: MsgSize::default(),
            pair_sample: PairSample::Auto,
            seed: 1,
            trace_mobility: false,
            trace_link_events: false,
        }
    }
}

impl SimConfig {
    /// Side of the square area giving `target_density` expected neighbors.
    pub fn area(&self) -> f64 {
        (self.node_count as f64 * PI * self.radio_range * self.radio_range / self.target_density)
            .sqrt()
    }

    /// Heartbeat period of whichever protocol is running.
    pub fn heartbeat_period(&self) -> f64 {
        match self.protocol {
            Protocol::Lsr => self.beacon_period,
            Protocol::Olsr => self.olsr.hello_interval,
        }
    }

    /// Expected link failure detection time, `k` missed heartbeats.
    pub fn failure_estimation_time(&self) -> f64 {
        self.miss_threshold as f64 * self.heartbeat_period()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.node_count < 2 {
            return bad("node_count must be at least 2");
        }
        if !(self.target_density > 0.0) || !(self.radio_range > 0.0) {
            return bad("target_density and radio_range must be positive");
        }
        if !(self.area() > 0.0) || !self.area().is_finite() {
            return bad("derived area must be positive");
        }
        if !(self.duration > 0.0) {
            return bad("duration must be positive");
        }
        if !(self.warmup >= 0.0) || self.warmup >= self.duration {
            return bad("warmup must lie in [0, duration)");
        }
        if !(self.snapshot_interval > 0.0) {
            return bad("snapshot_interval must be positive");
        }
        if !(self.beacon_period > 0.0) {
            return bad("beacon_period must be positive");
        }
        if self.miss_threshold < 1 {
            return bad("miss_threshold must be at least 1");
        }
        let (lo, hi) = self.per_hop_delay;
        if !(lo >= 0.0) || !(lo <= hi) {
            return bad("per_hop_delay requires 0 <= min <= max");
        }
        if !(0.0..=1.0).contains(&self.loss_probability) {
            return bad("loss_probability must lie in [0, 1]");
        }
        if !(self.olsr.hello_interval > 0.0) || !(self.olsr.tc_interval > 0.0) {
            return bad("olsr intervals must be positive");
        }
        if !(self.channel_capacity > 0.0) {
            return bad("channel_capacity must be positive");
        }
        if let PairSample::Count(0) = self.pair_sample {
            return bad("pair_sample must be positive");
        }
        self.mobility.validate()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses the flat key/value format on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
                line: idx + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::ConfigParse {
                    line: idx + 1,
                    msg: e.to_string(),
                })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key. Also used by sweeps to apply axis values.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad value `{v}` for `{key}`")))
        }
        fn flag(key: &str, v: &str) -> Result<bool> {
            match v {
                "true" | "1" | "on" | "yes" => Ok(true),
                "false" | "0" | "off" | "no" => Ok(false),
                _ => Err(Error::Config(format!("bad boolean `{v}` for `{key}`"))),
            }
        }
        let m = &mut self.mobility;
        match key {
            "node_count" | "n" => self.node_count = num(key, value)?,
            "target_density" => self.target_density = num(key, value)?,
            "radio_range" => self.radio_range = num(key, value)?,
            "duration" => self.duration = num(key, value)?,
            "warmup" => self.warmup = num(key, value)?,
            "snapshot_interval" => self.snapshot_interval = num(key, value)?,
            "beacon_period" | "B" => self.beacon_period = num(key, value)?,
            "miss_threshold" => self.miss_threshold = num(key, value)?,
            "per_hop_delay.min" => self.per_hop_delay.0 = num(key, value)?,
            "per_hop_delay.max" => self.per_hop_delay.1 = num(key, value)?,
            "loss_probability" => self.loss_probability = num(key, value)?,
            "protocol" => {
                self.protocol = match value.to_ascii_lowercase().as_str() {
                    "lsr" => Protocol::Lsr,
                    "olsr" => Protocol::Olsr,
                    _ => return Err(Error::Config(format!("unknown protocol `{value}`"))),
                }
            }
            "olsr.hello_interval" => self.olsr.hello_interval = num(key, value)?,
            "olsr.tc_interval" => self.olsr.tc_interval = num(key, value)?,
            "channel_capacity" => self.channel_capacity = num(key, value)?,
            "control_msg.header_bytes" => self.control_msg_size.header_bytes = num(key, value)?,
            "control_msg.per_id_bytes" => self.control_msg_size.per_id_bytes = num(key, value)?,
            "pair_sample" => {
                self.pair_sample = match value.to_ascii_lowercase().as_str() {
                    "auto" => PairSample::Auto,
                    "all" => PairSample::All,
                    _ => PairSample::Count(num(key, value)?),
                }
            }
            "seed" => self.seed = num(key, value)?,
            "trace.mobility" => self.trace_mobility = flag(key, value)?,
            "trace.link_events" => self.trace_link_events = flag(key, value)?,
            "mobility.model" | "mobility" => {
                m.model = value
                    .parse::<MobilityModel>()
                    .map_err(Error::Config)?
            }
            "mobility.v_min" => m.v_min = num(key, value)?,
            "mobility.v_max" => m.v_max = num(key, value)?,
            // `speed = 2-4` shorthand for sweeps
            "speed" | "mobility.speed" => {
                let (lo, hi) = value
                    .split_once('-')
                    .ok_or_else(|| Error::Config(format!("speed expects `min-max`, got `{value}`")))?;
                m.v_min = num(key, lo.trim())?;
                m.v_max = num(key, hi.trim())?;
            }
            "mobility.leg_distance" => m.leg_distance = num(key, value)?,
            "mobility.pause_time" => m.pause_time = num(key, value)?,
            "mobility.alpha" => m.alpha = num(key, value)?,
            "mobility.gm_update_interval" => m.gm_update_interval = num(key, value)?,
            "mobility.gm_mean_speed" => {
                m.gm_mean_speed = match value {
                    "auto" => None,
                    v => Some(num(key, v)?),
                }
            }
            "mobility.gm_speed_sigma" => m.gm_speed_sigma = num(key, value)?,
            "mobility.gm_dir_sigma" => m.gm_dir_sigma = num(key, value)?,
            "mobility.tick" => m.tick = num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Renders the config back into the file format. `parse(to_kv())` is lossless.
    pub fn to_kv(&self) -> String {
        let m = &self.mobility;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("node_count", self.node_count.to_string());
        kv("target_density", self.target_density.to_string());
        kv("radio_range", self.radio_range.to_string());
        kv("duration", self.duration.to_string());
        kv("warmup", self.warmup.to_string());
        kv("snapshot_interval", self.snapshot_interval.to_string());
        kv("beacon_period", self.beacon_period.to_string());
        kv("miss_threshold", self.miss_threshold.to_string());
        kv("per_hop_delay.min", self.per_hop_delay.0.to_string());
        kv("per_hop_delay.max", self.per_hop_delay.1.to_string());
        kv("loss_probability", self.loss_probability.to_string());
        kv("protocol", self.protocol.as_str().to_string());
        kv("olsr.hello_interval", self.olsr.hello_interval.to_string());
        kv("olsr.tc_interval", self.olsr.tc_interval.to_string());
        kv("channel_capacity", self.channel_capacity.to_string());
        kv(
            "control_msg.header_bytes",
            self.control_msg_size.header_bytes.to_string(),
        );
        kv(
            "control_msg.per_id_bytes",
            self.control_msg_size.per_id_bytes.to_string(),
        );
        kv(
            "pair_sample",
            match self.pair_sample {
                PairSample::Auto => "auto".to_string(),
                PairSample::All => "all".to_string(),
                PairSample::Count(k) => k.to_string(),
            },
        );
        kv("seed", self.seed.to_string());
        kv("trace.mobility", self.trace_mobility.to_string());
        kv("trace.link_events", self.trace_link_events.to_string());
        kv("mobility.model", m.model.as_str().to_string());
        kv("mobility.v_min", m.v_min.to_string());
        kv("mobility.v_max", m.v_max.to_string());
        kv("mobility.leg_distance", m.leg_distance.to_string());
        kv("mobility.pause_time", m.pause_time.to_string());
        kv("mobility.alpha", m.alpha.to_string());
        kv("mobility.gm_update_interval", m.gm_update_interval.to_string());
        kv(
            "mobility.gm_mean_speed",
            m.gm_mean_speed
                .map_or_else(|| "auto".to_string(), |v| v.to_string()),
        );
        kv("mobility.gm_speed_sigma", m.gm_speed_sigma.to_string());
        kv("mobility.gm_dir_sigma", m.gm_dir_sigma.to_string());
        kv("mobility.tick", m.tick.to_string());
        s
    }

    /// Identifier of everything except node count and seed; runs sharing it
    /// belong on the same curve.
    pub fn curve_id(&self) -> String {
        let m = &self.mobility;
        let mut id = format!(
            "{}_{}_hb{}_v{}-{}",
            self.protocol.as_str(),
            m.model.as_str(),
            self.heartbeat_period(),
            m.v_min,
            m.v_max
        );
        if self.protocol == Protocol::Olsr {
            let _ = write!(id, "_tc{}", self.olsr.tc_interval);
        }
        id
    }

    /// Directory-safe label for one run.
    pub fn run_label(&self) -> String {
        format!("{}_n{}_s{}", self.curve_id(), self.node_count, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_gives_target_density() {
        let cfg = SimConfig {
            node_count: 400,
            ..Default::default()
        };
        // expected neighbors of an interior node: (n-1)/side^2 * pi r^2
        let side = cfg.area();
        let rho = 399.0 / (side * side) * PI * 100.0 * 100.0;
        assert!((rho - 8.0).abs() < 0.05, "{rho}");
    }

    #[test]
    fn parse_round_trip() {
        let mut cfg = SimConfig::default();
        cfg.node_count = 42;
        cfg.protocol = Protocol::Olsr;
        cfg.pair_sample = PairSample::Count(777);
        cfg.mobility.model = MobilityModel::GaussMarkov;
        cfg.mobility.gm_mean_speed = Some(3.5);
        let back = SimConfig::parse(&cfg.to_kv()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn parse_comments_and_speed_shorthand() {
        let cfg = SimConfig::parse(
            "# test\nnode_count = 10  # ten\n\nspeed = 3-5\nmobility.model = random_waypoint\n",
        )
        .unwrap();
        assert_eq!(cfg.node_count, 10);
        assert_eq!((cfg.mobility.v_min, cfg.mobility.v_max), (3.0, 5.0));
        assert_eq!(cfg.mobility.model, MobilityModel::RandomWaypoint);
    }

    #[test]
    fn rejects_unknown_key_and_bad_values() {
        assert!(matches!(
            SimConfig::parse("nodes = 10"),
            Err(Error::ConfigParse { line: 1, .. })
        ));
        assert!(SimConfig::parse("node_count = 1").is_err());
        assert!(SimConfig::parse("beacon_period = 0").is_err());
        assert!(SimConfig::parse("miss_threshold = 0").is_err());
        assert!(SimConfig::parse("per_hop_delay.min = 0.01\nper_hop_delay.max = 0.001").is_err());
        assert!(SimConfig::parse("snapshot_interval = -1").is_err());
        assert!(SimConfig::parse("node_count").is_err());
    }

    #[test]
    fn pair_sample_resolution() {
        assert_eq!(PairSample::Auto.resolve(200), None);
        assert_eq!(PairSample::Auto.resolve(201), Some(AUTO_PAIR_COUNT));
        assert_eq!(PairSample::All.resolve(500), None);
        assert_eq!(PairSample::Count(50).resolve(5), None);
        assert_eq!(PairSample::Count(10).resolve(5), Some(10));
    }
}
