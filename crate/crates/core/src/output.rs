//! On-disk run artifacts. Numbers are written with fixed decimals so that
//! identical runs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use crate::engine::{RunResult, RunSummary};
use crate::error::{Error, Result};
use crate::metrics::{HistogramExport, IntervalState};

pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.txt";
pub const INTERVALS_FILE: &str = "intervals.csv";
pub const REACHABILITY_FILE: &str = "reachability.csv";
pub const CHURN_FILE: &str = "churn.csv";
pub const NLO_FILE: &str = "nlo.csv";
pub const MOBILITY_TRACE_FILE: &str = "mobility_trace.csv";
pub const LINK_EVENTS_FILE: &str = "link_events.csv";

fn hist_file(kind: &str) -> String {
    format!("hist_{kind}.csv")
}

fn cdf_file(kind: &str) -> String {
    format!("cdf_{kind}.csv")
}

struct Table {
    path: PathBuf,
    w: csv::Writer<fs::File>,
}

impl Table {
    fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| Error::csv(&path, e))?;
        w.write_record(header).map_err(|e| Error::csv(&path, e))?;
        Ok(Self { path, w })
    }

    fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields).map_err(|e| Error::csv(&self.path, e))
    }

    fn close(mut self) -> Result<()> {
        self.w.flush().map_err(|e| Error::io(&self.path, e))
    }
}

fn write_histogram(dir: &Path, kind: &str, h: &HistogramExport) -> Result<[String; 2]> {
    let hist = hist_file(kind);
    let mut t = Table::create(dir, &hist, &["bin_start_s", "normalized_count"])?;
    for &(b, c) in &h.bins {
        t.row([format!("{b:.3}"), format!("{c:.9}")])?;
    }
    t.close()?;
    let cdf = cdf_file(kind);
    let mut t = Table::create(dir, &cdf, &["length_s", "cdf"])?;
    for &(v, c) in &h.cdf {
        t.row([format!("{v:.3}"), format!("{c:.9}")])?;
    }
    t.close()?;
    Ok([hist, cdf])
}

/// Writes every artifact of `result` into `dir` and returns the summary
/// with its artifact list filled in.
pub fn write_run(result: &RunResult, dir: &Path) -> Result<RunSummary> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut artifacts = Vec::new();

    let cfg_path = dir.join(CONFIG_FILE);
    fs::write(&cfg_path, result.summary.config.to_kv()).map_err(|e| Error::io(&cfg_path, e))?;
    artifacts.push(CONFIG_FILE.to_string());

    let mut t = Table::create(
        dir,
        INTERVALS_FILE,
        &["pair_src", "pair_dst", "state", "start_s", "end_s", "tainted"],
    )?;
    for r in &result.intervals {
        t.row([
            r.src.to_string(),
            r.dst.to_string(),
            r.state.as_str().to_string(),
            format!("{:.3}", r.start),
            format!("{:.3}", r.end),
            r.tainted.to_string(),
        ])?;
    }
    t.close()?;
    artifacts.push(INTERVALS_FILE.to_string());

    for (kind, state) in [
        ("connectivity", IntervalState::Connected),
        ("repair", IntervalState::Broken),
    ] {
        artifacts.extend(write_histogram(dir, kind, &result.histogram(state))?);
    }

    let mut t = Table::create(dir, REACHABILITY_FILE, &["t", "reachable_fraction"])?;
    for &(ts, f) in &result.reachability {
        t.row([format!("{ts:.3}"), format!("{f:.9}")])?;
    }
    t.close()?;
    artifacts.push(REACHABILITY_FILE.to_string());

    let mut t = Table::create(
        dir,
        CHURN_FILE,
        &["window_start", "adds_per_sec", "removals_per_sec", "changes_per_node_per_sec"],
    )?;
    for w in &result.churn_windows {
        t.row([
            format!("{:.3}", w.window_start),
            format!("{:.6}", w.adds_per_sec),
            format!("{:.6}", w.removals_per_sec),
            format!("{:.6}", w.changes_per_node_per_sec),
        ])?;
    }
    t.close()?;
    artifacts.push(CHURN_FILE.to_string());

    let mut t = Table::create(dir, NLO_FILE, &["t", "node", "kind", "bytes"])?;
    for (ts, node, kind, bytes) in result.control.rows() {
        t.row([
            format!("{ts:.0}"),
            node.to_string(),
            kind.as_str().to_string(),
            bytes.to_string(),
        ])?;
    }
    t.close()?;
    artifacts.push(NLO_FILE.to_string());

    let cfg = &result.summary.config;
    if cfg.trace_mobility {
        let mut t = Table::create(dir, MOBILITY_TRACE_FILE, &["t", "node", "x", "y"])?;
        for &(ts, node, x, y) in &result.mobility_trace {
            t.row([
                format!("{ts:.3}"),
                node.to_string(),
                format!("{x:.3}"),
                format!("{y:.3}"),
            ])?;
        }
        t.close()?;
        artifacts.push(MOBILITY_TRACE_FILE.to_string());
    }
    if cfg.trace_link_events {
        let mut t = Table::create(dir, LINK_EVENTS_FILE, &["t", "node", "neighbor", "kind"])?;
        for e in &result.link_trace {
            let kind = match e.kind {
                crate::link_estimation::LinkEventKind::Discovered => "discovered",
                crate::link_estimation::LinkEventKind::Lost => "lost",
            };
            t.row([
                format!("{:.6}", e.time),
                e.at_node.to_string(),
                e.neighbor.to_string(),
                kind.to_string(),
            ])?;
        }
        t.close()?;
        artifacts.push(LINK_EVENTS_FILE.to_string());
    }

    artifacts.push(SUMMARY_FILE.to_string());
    let mut summary = result.summary.clone();
    summary.artifacts = artifacts;
    let path = dir.join(SUMMARY_FILE);
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Json {
        path: path.clone(),
        source: e,
    })?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}

pub fn read_summary(path: &Path) -> Result<RunSummary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Every `summary.json` at most one directory level below `dir`, including
/// `dir` itself, in sorted path order.
pub fn collect_summaries(dir: &Path) -> Result<Vec<RunSummary>> {
    let mut paths = Vec::new();
    let own = dir.join(SUMMARY_FILE);
    if own.is_file() {
        paths.push(own);
    }
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let p = entry.path().join(SUMMARY_FILE);
        if p.is_file() {
            paths.push(p);
        }
    }
    paths.sort();
    paths.iter().map(|p| read_summary(p)).collect()
}

/// Simulates `cfg` and writes its artifacts into `dir`.
pub fn run(cfg: &crate::config::SimConfig, dir: &Path) -> Result<RunSummary> {
    let result = crate::engine::simulate(cfg)?;
    write_run(&result, dir)
}
