use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use manet_wall::analysis::{self, TheoryParams};
use manet_wall::output;
use manet_wall::sweep::{self, Axis};
use manet_wall::SimConfig;

#[derive(Parser)]
#[command(name = "manet-wall", version, about = "MANET path connectivity and repair simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one simulation and write its artifacts.
    Sim {
        /// key=value config file; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Extra `key=value` overrides applied after the file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the cartesian product of axes and seeds.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// `name=v1,v2,...`; repeat for more axes.
        #[arg(long)]
        axis: Vec<String>,
        /// Comma-separated seeds.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long, default_value = "sweep-out")]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Also write the analysis tables into the output directory.
        #[arg(long)]
        analyze: bool,
    },
    /// Aggregate run summaries under a directory into curves, fits, walls and theory.
    Analyze { dir: PathBuf },
    /// Predicted connectivity time and mean hop count for the given sizes.
    Theory {
        /// Comma-separated node counts.
        #[arg(long)]
        n: String,
        /// Per-link removal rate, 1/s.
        #[arg(long)]
        theta: f64,
        /// `N:MEDIAN`, a simulated connectivity median to calibrate against.
        #[arg(long)]
        calibrate: Option<String>,
        /// Calibration constant used when `--calibrate` is absent.
        #[arg(long, default_value_t = 1.0)]
        calib_c: f64,
        #[arg(long, default_value_t = 8.0)]
        rho: f64,
        /// Random instances averaged per size for the hop count.
        #[arg(long, default_value_t = 3)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load(config: Option<&PathBuf>, overrides: &[String]) -> anyhow::Result<SimConfig> {
    let mut cfg = match config {
        Some(p) => SimConfig::from_file(p)?,
        None => SimConfig::default(),
    };
    for kv in overrides {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("override `{kv}` is not key=value"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_list(s: &str) -> anyhow::Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().with_context(|| format!("bad node count `{v}`")))
        .collect()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.cmd {
        Cmd::Sim {
            config,
            out,
            seed,
            overrides,
        } => {
            let mut cfg = load(config.as_ref(), &overrides)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let s = output::run(&cfg, &out)?;
            println!(
                "{}: reachability {:.4}, connectivity median {}, repair median {}, nlo {:.5}",
                s.label,
                s.reachability_mean.unwrap_or(f64::NAN),
                fmt_opt(s.connectivity.median_s),
                fmt_opt(s.repair.median_s),
                s.nlo_fraction
            );
        }
        Cmd::Sweep {
            config,
            axis,
            seeds,
            out,
            overrides,
            analyze,
        } => {
            let base = load(config.as_ref(), &overrides)?;
            let axes = axis
                .iter()
                .map(|a| a.parse::<Axis>())
                .collect::<Result<Vec<_>, _>>()?;
            let seeds = match seeds {
                Some(s) => sweep::parse_seeds(&s)?,
                None => Vec::new(),
            };
            let configs = sweep::expand(&base, &axes, &seeds)?;
            let runs = sweep::run_to_dir(&configs, &out)?;
            println!("{} runs written to {}", runs.len(), out.display());
            if analyze {
                analysis::analyze_dir(&out)?;
            }
        }
        Cmd::Analyze { dir } => {
            let report = analysis::analyze_dir(&dir)?;
            for (id, w) in &report.walls {
                println!(
                    "{id}: wall at n = {:.1} ({}{})",
                    w.n_star,
                    w.method.as_str(),
                    if w.extrapolated { ", extrapolated" } else { "" }
                );
            }
            for note in &report.notes {
                eprintln!("note: {note}");
            }
        }
        Cmd::Theory {
            n,
            theta,
            calibrate,
            calib_c,
            rho,
            instances,
            seed,
        } => {
            let ns = parse_list(&n)?;
            if ns.iter().any(|&n| n < 2) {
                bail!("node counts must be at least 2");
            }
            let params = match calibrate {
                Some(c) => {
                    let (n0, m) = c
                        .split_once(':')
                        .with_context(|| format!("calibration `{c}` is not N:MEDIAN"))?;
                    TheoryParams::calibrate(theta, n0.trim().parse()?, m.trim().parse()?)?
                }
                None => TheoryParams { theta, calib_c },
            };
            if !(theta > 0.0) {
                bail!("theta must be positive");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            println!("n,predicted_connectivity_s,mean_hops");
            for n in ns {
                let mut hops = 0.0;
                for _ in 0..instances.max(1) {
                    hops += analysis::connected_instance(n, rho, 100.0, &mut rng)?.1;
                }
                println!(
                    "{n},{:.6},{:.6}",
                    analysis::theory_connectivity(n, &params),
                    hops / instances.max(1) as f64
                );
            }
        }
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}s")).unwrap_or_else(|| "n/a".into())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
