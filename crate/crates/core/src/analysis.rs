//! Cross-run aggregation: curves against n, log-log fits, the scaling wall,
//! repair budgets and the analytic predictions with their oracles.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::RunSummary;
use crate::error::{Error, Result};
use crate::ground_truth::GroundTruthGraph;
use crate::metrics::mean;

/// Fits below this r² are reported but not compared against thresholds.
pub const MIN_R2: f64 = 0.8;
/// Repair bounds beyond this multiple of the largest sampled n are flagged.
pub const EXTRAPOLATION_LIMIT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: usize,
    pub median: f64,
    pub mean: f64,
    pub sample_count: usize,
}

impl CurvePoint {
    pub fn new(n: usize, median: f64, mean: f64) -> Self {
        Self {
            n,
            median,
            mean,
            sample_count: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Median,
    Mean,
}

impl Field {
    fn of(self, p: &CurvePoint) -> f64 {
        match self {
            Field::Median => p.median,
            Field::Mean => p.mean,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Field::Median => "median",
            Field::Mean => "mean",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl SlopeFit {
    pub fn predict(&self, n: f64) -> f64 {
        (self.intercept + self.slope * n.ln()).exp()
    }

    pub fn conclusive(&self) -> bool {
        self.r_squared >= MIN_R2
    }
}

/// Least squares on `(ln x, ln y)`, for any number of points ≥ 2.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Analysis(format!("power-law fit needs at least 2 points, got {}", xs.len())));
    }
    if let Some(bad) = xs.iter().chain(ys).find(|v| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::Analysis(format!("log-log fit needs positive values, got {bad}")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Analysis("log-log fit needs at least two distinct x values".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(SlopeFit {
        slope,
        intercept,
        r_squared,
        points: xs.len(),
    })
}

/// Log-log slope of one curve field against n. Needs three or more points.
pub fn fit_loglog(points: &[CurvePoint], field: Field) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::Analysis(format!("slope fit needs at least 3 points, got {}", points.len())));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| field.of(p)).collect();
    fit_power_law(&xs, &ys)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WallMethod {
    SegmentIntersection,
    PowerLawSolve,
}

impl WallMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            WallMethod::SegmentIntersection => "segment_intersection",
            WallMethod::PowerLawSolve => "power_law_solve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WallEstimate {
    pub n_star: f64,
    pub method: WallMethod,
    /// Set when no sampled bracket contains the crossing.
    pub extrapolated: bool,
}

fn sorted_medians(points: &[CurvePoint]) -> BTreeMap<usize, f64> {
    points.iter().map(|p| (p.n, p.median)).collect()
}

/// Network size where the connectivity median falls to the repair median.
pub fn find_wall(conn: &[CurvePoint], repair: &[CurvePoint]) -> Result<WallEstimate> {
    if conn.len() < 2 || repair.len() < 2 {
        return Err(Error::Analysis(format!(
            "wall needs at least 2 points per curve, got {} and {}",
            conn.len(),
            repair.len()
        )));
    }
    let c = sorted_medians(conn);
    let r = sorted_medians(repair);
    let mut gaps = Vec::new();
    for (&n, &cm) in &c {
        if let Some(&rm) = r.get(&n) {
            if !(cm > 0.0 && rm > 0.0) {
                return Err(Error::Analysis(format!("non-positive median at n={n}")));
            }
            gaps.push(((n as f64).ln(), cm.ln() - rm.ln()));
        }
    }
    for w in gaps.windows(2) {
        let ((x0, d0), (x1, d1)) = (w[0], w[1]);
        if d0 == 0.0 {
            return Ok(segment(x0));
        }
        if d0.signum() != d1.signum() {
            return Ok(segment(x0 + d0 / (d0 - d1) * (x1 - x0)));
        }
    }
    if let Some(&(x, 0.0)) = gaps.last() {
        return Ok(segment(x));
    }
    let fit = |m: &BTreeMap<usize, f64>| {
        let xs: Vec<f64> = m.keys().map(|&n| n as f64).collect();
        let ys: Vec<f64> = m.values().copied().collect();
        fit_power_law(&xs, &ys)
    };
    let (fc, fr) = (fit(&c)?, fit(&r)?);
    if (fc.slope - fr.slope).abs() < 1e-12 {
        return Err(Error::Analysis("connectivity and repair curves are parallel in log-log space".into()));
    }
    let x = (fr.intercept - fc.intercept) / (fc.slope - fr.slope);
    Ok(WallEstimate {
        n_star: x.exp(),
        method: WallMethod::PowerLawSolve,
        extrapolated: true,
    })
}

fn segment(log_n: f64) -> WallEstimate {
    WallEstimate {
        n_star: log_n.exp(),
        method: WallMethod::SegmentIntersection,
        extrapolated: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepairBound {
    pub seconds: f64,
    pub extrapolated: bool,
    /// `n_target` lies beyond `EXTRAPOLATION_LIMIT` times the largest sample.
    pub beyond_limit: bool,
}

/// Largest repair median that keeps `n_target` inside the wall: the
/// connectivity median predicted there.
pub fn required_repair_bound(conn: &[CurvePoint], n_target: f64) -> Result<RepairBound> {
    if !(n_target > 0.0) {
        return Err(Error::Analysis(format!("n_target must be positive, got {n_target}")));
    }
    let c = sorted_medians(conn);
    let pts: Vec<(f64, f64)> = c.iter().map(|(&n, &m)| (n as f64, m)).collect();
    if pts.is_empty() {
        return Err(Error::Analysis("empty connectivity curve".into()));
    }
    if let Some(&(_, m)) = pts.iter().find(|p| p.0 == n_target) {
        return Ok(RepairBound {
            seconds: m,
            extrapolated: false,
            beyond_limit: false,
        });
    }
    for w in pts.windows(2) {
        let ((n0, m0), (n1, m1)) = (w[0], w[1]);
        if n0 < n_target && n_target < n1 {
            let f = (n_target / n0).ln() / (n1 / n0).ln();
            return Ok(RepairBound {
                seconds: (m0.ln() + f * (m1 / m0).ln()).exp(),
                extrapolated: false,
                beyond_limit: false,
            });
        }
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let fit = fit_power_law(&xs, &ys)?;
    let max_n = xs.iter().copied().fold(0.0, f64::max);
    Ok(RepairBound {
        seconds: fit.predict(n_target),
        extrapolated: true,
        beyond_limit: n_target > EXTRAPOLATION_LIMIT * max_n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryParams {
    /// Per-link removal rate, 1/s.
    pub theta: f64,
    pub calib_c: f64,
}

impl TheoryParams {
    /// Fixes the constant so the prediction matches `median` at `n`.
    pub fn calibrate(theta: f64, n: usize, median: f64) -> Result<Self> {
        if !(theta > 0.0 && median > 0.0) {
            return Err(Error::Analysis(format!(
                "calibration needs positive theta and median, got {theta} and {median}"
            )));
        }
        Ok(Self {
            theta,
            calib_c: median * theta * (n as f64).sqrt(),
        })
    }
}

/// Predicted mean path connectivity time, `c / (θ √n)`.
pub fn theory_connectivity(n: usize, p: &TheoryParams) -> f64 {
    p.calib_c / (p.theta * (n as f64).sqrt())
}

/// Mean hop distance over all ordered pairs of the disk graph on
/// `positions`. A partitioned instance is an error.
pub fn theory_path_length(positions: &[[f64; 2]], radio_range: f64) -> Result<f64> {
    let n = positions.len();
    if n < 2 {
        return Err(Error::Analysis("path length needs at least 2 nodes".into()));
    }
    let g = GroundTruthGraph::build(positions, radio_range);
    let mut total = 0u64;
    for s in 0..n {
        for (d, &h) in g.bfs_hops(s as u32).iter().enumerate() {
            if d == s {
                continue;
            }
            if h == u32::MAX {
                return Err(Error::Analysis(format!("instance is partitioned: {s} cannot reach {d}")));
            }
            total += h as u64;
        }
    }
    Ok(total as f64 / (n * (n - 1)) as f64)
}

/// Uniform positions in the square sized for density `rho`, redrawn until
/// the disk graph is connected.
pub fn connected_instance(n: usize, rho: f64, radio_range: f64, rng: &mut impl Rng) -> Result<(Vec<[f64; 2]>, f64)> {
    let side = (n as f64 * std::f64::consts::PI * radio_range * radio_range / rho).sqrt();
    for _ in 0..1000 {
        let pos: Vec<[f64; 2]> = (0..n)
            .map(|_| [rng.random_range(0.0..side), rng.random_range(0.0..side)])
            .collect();
        if let Ok(mean) = theory_path_length(&pos, radio_range) {
            return Ok((pos, mean));
        }
    }
    Err(Error::Analysis(format!("no connected instance for n={n}, rho={rho} after 1000 draws")))
}

/// Mean hop distance averaged over `instances` connected random instances
/// per n, with the fitted log-log law.
pub fn path_length_law(ns: &[usize], rho: f64, instances: usize, seed: u64) -> Result<(Vec<(usize, f64)>, SlopeFit)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    for &n in ns {
        let mut sum = 0.0;
        for _ in 0..instances {
            sum += connected_instance(n, rho, 100.0, &mut rng)?.1;
        }
        rows.push((n, sum / instances as f64));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let fit = fit_power_law(&xs, &ys)?;
    Ok((rows, fit))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CurveKind {
    Connectivity,
    Repair,
    FailureRate,
    Reachability,
}

impl CurveKind {
    pub const ALL: [CurveKind; 4] = [
        CurveKind::Connectivity,
        CurveKind::Repair,
        CurveKind::FailureRate,
        CurveKind::Reachability,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::Connectivity => "connectivity",
            CurveKind::Repair => "repair",
            CurveKind::FailureRate => "failure_rate",
            CurveKind::Reachability => "reachability",
        }
    }
}

/// Per-seed values at one n, before reduction to a `CurvePoint`.
#[derive(Debug, Clone, Default)]
struct Samples {
    medians: Vec<f64>,
    means: Vec<f64>,
}

/// All curves of one configuration family (same curve id, varying n).
#[derive(Debug, Clone, Default)]
pub struct CurveSet {
    pub curves: BTreeMap<CurveKind, Vec<CurvePoint>>,
    /// Seed-level `(min, max)` of the median per kind and n.
    pub bands: BTreeMap<(CurveKind, usize), (f64, f64)>,
    /// Mean measured θ per n.
    pub theta: BTreeMap<usize, f64>,
    /// Mean per-node link change rate per n.
    pub churn: BTreeMap<usize, f64>,
}

impl CurveSet {
    pub fn get(&self, kind: CurveKind) -> &[CurvePoint] {
        self.curves.get(&kind).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Groups runs by curve id and reduces each n over seeds: the point median
/// is the mean of per-seed medians and the point mean the mean of per-seed
/// means.
pub fn build_curves(runs: &[RunSummary]) -> BTreeMap<String, CurveSet> {
    let mut raw: BTreeMap<String, BTreeMap<(CurveKind, usize), Samples>> = BTreeMap::new();
    let mut theta: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    let mut churn: BTreeMap<String, BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in runs {
        let n = r.config.node_count;
        let entry = raw.entry(r.curve_id.clone()).or_default();
        let mut push = |kind, med: Option<f64>, mean: Option<f64>| {
            if let (Some(md), Some(mn)) = (med, mean) {
                let s = entry.entry((kind, n)).or_default();
                s.medians.push(md);
                s.means.push(mn);
            }
        };
        push(CurveKind::Connectivity, r.connectivity.median_s, r.connectivity.mean_s);
        push(CurveKind::Repair, r.repair.median_s, r.repair.mean_s);
        push(CurveKind::FailureRate, Some(r.path_failure_rate), Some(r.path_failure_rate));
        push(CurveKind::Reachability, r.reachability_median, r.reachability_mean);
        if let Some(t) = r.theta {
            theta.entry(r.curve_id.clone()).or_default().entry(n).or_default().push(t);
        }
        if let Some(c) = r.churn {
            churn
                .entry(r.curve_id.clone())
                .or_default()
                .entry(n)
                .or_default()
                .push(c.changes_per_node_per_sec);
        }
    }
    let reduce = |m: Option<&BTreeMap<usize, Vec<f64>>>| -> BTreeMap<usize, f64> {
        m.map(|m| m.iter().filter_map(|(&n, v)| mean(v).map(|x| (n, x))).collect())
            .unwrap_or_default()
    };
    raw.into_iter()
        .map(|(id, samples)| {
            let mut set = CurveSet {
                theta: reduce(theta.get(&id)),
                churn: reduce(churn.get(&id)),
                ..Default::default()
            };
            for ((kind, n), s) in samples {
                let point = CurvePoint {
                    n,
                    median: mean(&s.medians).unwrap_or(f64::NAN),
                    mean: mean(&s.means).unwrap_or(f64::NAN),
                    sample_count: s.medians.len(),
                };
                let lo = s.medians.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = s.medians.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                set.bands.insert((kind, n), (lo, hi));
                set.curves.entry(kind).or_default().push(point);
            }
            (id, set)
        })
        .collect()
}

/// Node count used to calibrate the connectivity law: the lower middle of
/// the sampled sizes.
pub fn calibration_n(points: &[CurvePoint]) -> Option<usize> {
    let mut ns: Vec<usize> = points.iter().map(|p| p.n).collect();
    ns.sort_unstable();
    ns.get(ns.len().saturating_sub(1) / 2).copied()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoryRow {
    pub n: usize,
    pub theta: f64,
    pub simulated_s: f64,
    pub predicted_s: f64,
    pub relative_error: f64,
    pub calibrated_at: usize,
}

/// Calibrates the connectivity law at `calibration_n` and predicts every
/// other sampled n.
pub fn theory_rows(set: &CurveSet) -> Result<Vec<TheoryRow>> {
    let conn = set.get(CurveKind::Connectivity);
    let n0 = calibration_n(conn).ok_or_else(|| Error::Analysis("empty connectivity curve".into()))?;
    let p0 = conn.iter().find(|p| p.n == n0).expect("calibration point");
    let theta = *set
        .theta
        .get(&n0)
        .ok_or_else(|| Error::Analysis(format!("no theta measured at n={n0}")))?;
    let params = TheoryParams::calibrate(theta, n0, p0.median)?;
    Ok(conn
        .iter()
        .map(|p| {
            let predicted = theory_connectivity(p.n, &params);
            TheoryRow {
                n: p.n,
                theta,
                simulated_s: p.median,
                predicted_s: predicted,
                relative_error: (predicted - p.median).abs() / p.median,
                calibrated_at: n0,
            }
        })
        .collect())
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Default)]
pub struct AnalysisReport {
    pub curves: BTreeMap<String, CurveSet>,
    pub fits: Vec<(String, CurveKind, Field, SlopeFit)>,
    pub walls: Vec<(String, WallEstimate)>,
    pub theory: Vec<(String, TheoryRow)>,
    /// Non-fatal problems, e.g. too few points for a fit.
    pub notes: Vec<String>,
}

pub fn analyze_runs(runs: &[RunSummary]) -> AnalysisReport {
    let curves = build_curves(runs);
    let mut report = AnalysisReport::default();
    for (id, set) in &curves {
        for kind in CurveKind::ALL {
            let pts = set.get(kind);
            if pts.is_empty() {
                continue;
            }
            for field in [Field::Median, Field::Mean] {
                match fit_loglog(pts, field) {
                    Ok(f) => report.fits.push((id.clone(), kind, field, f)),
                    Err(e) => report.notes.push(format!("{id} {} {}: {e}", kind.as_str(), field.as_str())),
                }
            }
        }
        match find_wall(set.get(CurveKind::Connectivity), set.get(CurveKind::Repair)) {
            Ok(w) => report.walls.push((id.clone(), w)),
            Err(e) => report.notes.push(format!("{id} wall: {e}")),
        }
        match theory_rows(set) {
            Ok(rows) => report.theory.extend(rows.into_iter().map(|r| (id.clone(), r))),
            Err(e) => report.notes.push(format!("{id} theory: {e}")),
        }
    }
    report.curves = curves;
    report
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

/// Writes `curves.csv`, `fits.csv`, `wall.csv` and `theory.csv` into `dir`.
pub fn write_report(report: &AnalysisReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rows = Vec::new();
    for (id, set) in &report.curves {
        for (kind, pts) in &set.curves {
            for p in pts {
                let (lo, hi) = set.bands[&(*kind, p.n)];
                rows.push(vec![
                    id.clone(),
                    p.n.to_string(),
                    kind.as_str().to_string(),
                    f6(p.median),
                    f6(p.mean),
                    f6(lo),
                    f6(hi),
                    p.sample_count.to_string(),
                ]);
            }
        }
    }
    write_csv(
        &dir.join("curves.csv"),
        &["curve_id", "n", "kind", "median_s", "mean_s", "median_min_s", "median_max_s", "runs"],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = report
        .fits
        .iter()
        .map(|(id, kind, field, f)| {
            vec![
                id.clone(),
                kind.as_str().to_string(),
                field.as_str().to_string(),
                f6(f.slope),
                f6(f.intercept),
                f6(f.r_squared),
                f.points.to_string(),
                if f.conclusive() { "ok" } else { "inconclusive" }.to_string(),
            ]
        })
        .collect();
    write_csv(
        &dir.join("fits.csv"),
        &["curve_id", "kind", "field", "slope", "intercept", "r2", "points", "status"],
        &rows,
    )?;

    let rows: Vec<Vec<String>> = report
        .walls
        .iter()
        .map(|(id, w)| {
            vec![
                id.clone(),
                format!("{:.3}", w.n_star),
                w.method.as_str().to_string(),
                w.extrapolated.to_string(),
            ]
        })
        .collect();
    write_csv(&dir.join("wall.csv"), &["curve_id", "n_star", "method", "extrapolated"], &rows)?;

    let rows: Vec<Vec<String>> = report
        .theory
        .iter()
        .map(|(id, r)| {
            vec![
                id.clone(),
                r.n.to_string(),
                f6(r.theta),
                f6(r.simulated_s),
                f6(r.predicted_s),
                f6(r.relative_error),
                r.calibrated_at.to_string(),
            ]
        })
        .collect();
    write_csv(
        &dir.join("theory.csv"),
        &["curve_id", "n", "theta", "simulated_median_s", "predicted_s", "relative_error", "calibrated_at"],
        &rows,
    )
}

/// Reads every run summary under `dir` and writes the analysis tables next
/// to them.
pub fn analyze_dir(dir: &Path) -> Result<AnalysisReport> {
    let runs = crate::output::collect_summaries(dir)?;
    if runs.is_empty() {
        return Err(Error::Analysis(format!("no run summaries under {}", dir.display())));
    }
    let report = analyze_runs(&runs);
    write_report(&report, dir)?;
    Ok(report)
}
