//! Parameter sweeps: the cartesian product of axes times seeds, run in
//! parallel, one output directory per run plus an aggregated table.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::SimConfig;
use crate::engine::{simulate, RunSummary};
use crate::error::{Error, Result};
use crate::output::write_run;

pub const RUNS_FILE: &str = "runs.csv";

/// One swept parameter, written `name=v1,v2,...` with config-file keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<String>,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, vals) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("axis `{s}` is not name=v1,v2,...")))?;
        let values: Vec<String> = vals
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(String::from)
            .collect();
        if values.is_empty() {
            return Err(Error::Config(format!("axis `{name}` has no values")));
        }
        Ok(Axis {
            name: name.trim().to_string(),
            values,
        })
    }
}

/// Parses `1,2,3` into seeds.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse()
                .map_err(|_| Error::Config(format!("bad seed `{v}`")))
        })
        .collect()
}

/// Every configuration of the sweep, axis values outermost and seeds
/// innermost. No axes gives the base alone; no seeds keeps the base seed.
pub fn expand(base: &SimConfig, axes: &[Axis], seeds: &[u64]) -> Result<Vec<SimConfig>> {
    let mut configs = vec![base.clone()];
    for axis in axes {
        let mut next = Vec::with_capacity(configs.len() * axis.values.len());
        for cfg in &configs {
            for v in &axis.values {
                let mut c = cfg.clone();
                c.set(&axis.name, v)?;
                next.push(c);
            }
        }
        configs = next;
    }
    if !seeds.is_empty() {
        configs = configs
            .into_iter()
            .flat_map(|c| {
                seeds.iter().map(move |&s| SimConfig { seed: s, ..c.clone() })
            })
            .collect();
    }
    for c in &configs {
        c.validate().map_err(|e| Error::Run {
            label: c.run_label(),
            source: Box::new(e),
        })?;
    }
    Ok(configs)
}

fn labeled<T>(cfg: &SimConfig, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Run {
        label: cfg.run_label(),
        source: Box::new(e),
    })
}

/// Runs every configuration in memory and keeps only the summaries.
pub fn run_all(configs: &[SimConfig]) -> Result<Vec<RunSummary>> {
    configs
        .par_iter()
        .map(|c| labeled(c, simulate(c).map(|r| r.summary)))
        .collect()
}

/// Runs every configuration, writing each into `out/<index>_<label>` and
/// the aggregated table into `out/runs.csv`.
pub fn run_to_dir(configs: &[SimConfig], out: &Path) -> Result<Vec<RunSummary>> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let summaries: Vec<RunSummary> = configs
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let dir = out.join(format!("r{i:03}_{}", c.run_label()));
            labeled(c, simulate(c).and_then(|r| write_run(&r, &dir)))
        })
        .collect::<Result<_>>()?;
    write_runs_table(&summaries, &out.join(RUNS_FILE))?;
    Ok(summaries)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// One row per run keyed by (n, B, mobility, speed, seed).
pub fn write_runs_table(summaries: &[RunSummary], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header = [
        "n",
        "beacon_period",
        "mobility",
        "speed",
        "seed",
        "protocol",
        "curve_id",
        "reachability_mean",
        "connectivity_median_s",
        "connectivity_mean_s",
        "connectivity_count",
        "repair_median_s",
        "repair_mean_s",
        "repair_count",
        "path_failure_rate",
        "theta",
        "changes_per_node_per_sec",
        "nlo_fraction",
    ];
    w.write_record(header).map_err(|e| Error::csv(path, e))?;
    for s in summaries {
        let c = &s.config;
        let m = &c.mobility;
        w.write_record([
            c.node_count.to_string(),
            c.heartbeat_period().to_string(),
            m.model.as_str().to_string(),
            format!("{}-{}", m.v_min, m.v_max),
            c.seed.to_string(),
            c.protocol.as_str().to_string(),
            s.curve_id.clone(),
            opt(s.reachability_mean),
            opt(s.connectivity.median_s),
            opt(s.connectivity.mean_s),
            s.connectivity.count.to_string(),
            opt(s.repair.median_s),
            opt(s.repair.mean_s),
            s.repair.count.to_string(),
            format!("{:.6}", s.path_failure_rate),
            opt(s.theta),
            opt(s.churn.map(|c| c.changes_per_node_per_sec)),
            format!("{:.9}", s.nlo_fraction),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let a: Axis = "n=50, 100,200".parse().unwrap();
        assert_eq!(a.name, "n");
        assert_eq!(a.values, vec!["50", "100", "200"]);
        assert!("n".parse::<Axis>().is_err());
        assert!("n=".parse::<Axis>().is_err());
        assert_eq!(parse_seeds("1,2, 3").unwrap(), vec![1, 2, 3]);
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn empty_axis_is_single_run() {
        let base = SimConfig::default();
        assert_eq!(expand(&base, &[], &[]).unwrap(), vec![base]);
    }

    #[test]
    fn product_of_axes_and_seeds() {
        let axes: Vec<Axis> = vec!["n=50,100".parse().unwrap(), "B=0.5,1".parse().unwrap()];
        let cfgs = expand(&SimConfig::default(), &axes, &[1, 2, 3]).unwrap();
        assert_eq!(cfgs.len(), 12);
        assert_eq!((cfgs[0].node_count, cfgs[0].beacon_period, cfgs[0].seed), (50, 0.5, 1));
        assert_eq!((cfgs[11].node_count, cfgs[11].beacon_period, cfgs[11].seed), (100, 1.0, 3));
    }

    #[test]
    fn invalid_value_names_the_run() {
        let axes = vec!["miss_threshold=0".parse().unwrap()];
        let err = expand(&SimConfig::default(), &axes, &[4]).unwrap_err();
        assert!(err.to_string().contains("_s4"), "{err}");
    }
}
