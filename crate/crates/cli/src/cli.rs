//! Subcommand definitions and dispatch.

use std::path::{Path, PathBuf};

use biokz::Method;
use clap::{Parser, Subcommand};

use crate::analysis::{self, CollapseSpec, DEFAULT_FIT_WINDOW};
use crate::config::{self, ExperimentConfig, MethodSelection, ProtocolKind};
use crate::error::{CliError, Result};
use crate::format;
use crate::selfcheck;
use crate::sweep;

const DEFAULT_OUT: &str = "biokz-out";

#[derive(Debug, Parser)]
#[command(name = "biokz", version, about = "Biorthogonal Kibble-Zurek sweeps of the non-Hermitian SSH model")]
pub struct Args {
    /// Experiment configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out` in the configuration).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (overrides `workers` in the configuration).
    #[arg(long, global = true, env = "BIOKZ_WORKERS")]
    pub workers: Option<usize>,
    /// Probability definition (overrides `method` in the configuration).
    #[arg(long, global = true)]
    pub method: Option<MethodSelection>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate n_ex over all configured instances and quench times.
    Sweep,
    /// Fit slow-quench power laws and fast-quench plateaus in a density file.
    Fit {
        /// Density CSV; defaults to `<out>/density.csv`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FIT_WINDOW.0)]
        window_min: f64,
        #[arg(long, default_value_t = DEFAULT_FIT_WINDOW.1)]
        window_max: f64,
    },
    /// Rescale momentum curves and report the collapse residual.
    Collapse {
        /// Mode CSV files of one instance at several quench times.
        #[arg(long, required = true, num_args = 1..)]
        modes: Vec<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        k_c: f64,
        /// One value, or a comma-separated grid.
        #[arg(long, value_delimiter = ',', required = true)]
        z: Vec<f64>,
        /// One value, or a comma-separated grid.
        #[arg(long, value_delimiter = ',', required = true)]
        nu: Vec<f64>,
        /// Only use modes within this momentum distance of k_c.
        #[arg(long)]
        half_width: Option<f64>,
    },
    /// Sweep a through-broken protocol, report the frozen density and write trajectories.
    Freeze,
    /// Write time-resolved band populations for the `[trajectory]` momenta.
    Traj,
    /// Check eigensystem and probability invariants on random matrices.
    Selfcheck {
        #[arg(long, default_value_t = 10_000)]
        cases: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load_config(args: &Args) -> Result<ExperimentConfig> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::Invalid("this command needs --config <path>".into()))?;
    let mut cfg = config::load(path)?;
    if let Some(w) = args.workers {
        cfg.workers = Some(w);
    }
    if let Some(m) = args.method {
        cfg.method = m;
    }
    if let Some(o) = &args.out {
        cfg.out_dir = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(args: &Args, cfg: Option<&ExperimentConfig>) -> PathBuf {
    args.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.out_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn primary_method(sel: MethodSelection) -> Method {
    sel.methods()[0]
}

pub fn run(args: Args) -> Result<()> {
    match &args.command {
        Command::Sweep => {
            let cfg = load_config(&args)?;
            let dir = out_dir(&args, Some(&cfg));
            let out = sweep::run_sweep(&cfg)?;
            sweep::write_sweep(&dir, &out)?;
            let failed = out.density.iter().filter(|r| !r.is_ok()).count();
            println!(
                "{} density rows ({} failed) in {:.1} s -> {}",
                out.density.len(),
                failed,
                out.wall_time_s,
                dir.display()
            );
        }
        Command::Fit {
            input,
            window_min,
            window_max,
        } => {
            let dir = out_dir(&args, None);
            let input = input.clone().unwrap_or_else(|| dir.join("density.csv"));
            let rows = format::read_density(&input)?;
            if rows.is_empty() {
                return Err(CliError::schema(&input, "no data rows"));
            }
            let report = analysis::fit_report(&rows, (*window_min, *window_max))?;
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("fit_report.json");
            format::write_json(&path, &report)?;
            for g in &report.groups {
                match g.fit {
                    Some(f) => println!(
                        "{} {} eps_i={:.4}: exponent {:.4} ± {:.4}",
                        g.protocol, g.method, g.eps_i, f.exponent, f.stderr_exponent
                    ),
                    None => println!(
                        "{} {} eps_i={:.4}: no fit ({})",
                        g.protocol,
                        g.method,
                        g.eps_i,
                        g.fit_error.as_deref().unwrap_or("")
                    ),
                }
            }
            println!("-> {}", path.display());
        }
        Command::Collapse {
            modes,
            k_c,
            z,
            nu,
            half_width,
        } => {
            let dir = out_dir(&args, None);
            let method = primary_method(args.method.unwrap_or(MethodSelection::Biorthogonal));
            let mut rows = Vec::new();
            for path in modes {
                let part = format::read_modes(path)?;
                if part.is_empty() {
                    return Err(CliError::schema(path, "no data rows"));
                }
                rows.extend(part);
            }
            let curves = analysis::curves_from_modes(&rows, method, *k_c, *half_width)?;
            let spec = CollapseSpec {
                k_c: *k_c,
                z: z.clone(),
                nu: nu.clone(),
                half_width: *half_width,
                method,
            };
            let outcome = analysis::collapse_report(&curves, &spec)?;
            std::fs::create_dir_all(&dir)?;
            format::write_json(&dir.join("collapse.json"), &outcome)?;
            format::write_table(&dir.join("collapse_rescaled.csv"), &["tau_q", "x", "n_ex_k"], &outcome.rescaled)?;
            if let Some(b) = outcome.best {
                println!(
                    "best z={} nu={}: residual {:.4e}",
                    b.z,
                    b.nu,
                    b.residual.unwrap_or(f64::NAN)
                );
            }
        }
        Command::Freeze => {
            let cfg = load_config(&args)?;
            if cfg.protocols.iter().any(|p| p.kind != ProtocolKind::ThroughBroken) {
                return Err(CliError::Invalid("freeze expects only through_broken protocols".into()));
            }
            let dir = out_dir(&args, Some(&cfg));
            let out = sweep::run_sweep(&cfg)?;
            sweep::write_sweep(&dir, &out)?;
            let method = primary_method(cfg.method);
            let table: Vec<Vec<f64>> = out
                .rows(method)
                .map(|r| vec![r.tau_q, r.n_ex, r.broken_share])
                .collect();
            format::write_table(&dir.join("freeze.csv"), &["tau_q", "n_ex", "broken_share"], &table)?;
            let report = analysis::freeze_report(&out.density, method)?;
            format::write_json(&dir.join("freeze_report.json"), &report)?;
            match report.n_0 {
                Some(n0) => println!("frozen density n_0 = {n0:.6e} (tail spread {:.2e})", report.tail_spread),
                None => println!("tail not flat (spread {:.2e})", report.tail_spread),
            }
            if !cfg.trajectory.k.is_empty() {
                let taus = if cfg.trajectory.tau_q.is_empty() {
                    vec![cfg.tau_q.iter().copied().fold(f64::NEG_INFINITY, f64::max)]
                } else {
                    cfg.trajectory.tau_q.clone()
                };
                write_trajectories(&cfg, &taus, &dir)?;
            }
        }
        Command::Traj => {
            let cfg = load_config(&args)?;
            let dir = out_dir(&args, Some(&cfg));
            let taus = if cfg.trajectory.tau_q.is_empty() {
                cfg.tau_q.clone()
            } else {
                cfg.trajectory.tau_q.clone()
            };
            write_trajectories(&cfg, &taus, &dir)?;
        }
        Command::Selfcheck { cases, seed } => {
            let report = selfcheck::run(*cases, *seed);
            for c in &report.checks {
                println!(
                    "{:<24} {} cases, max deviation {:.3e} (tol {:.0e}) {}",
                    c.name,
                    c.cases,
                    c.max_deviation,
                    c.tolerance,
                    if c.passed { "ok" } else { "FAIL" }
                );
            }
            if let Some(dir) = &args.out {
                std::fs::create_dir_all(dir)?;
                format::write_json(&dir.join("selfcheck.json"), &report)?;
            }
            report.into_result()?;
        }
    }
    Ok(())
}

/// Write every trajectory that succeeded; report the first failure afterwards.
fn write_trajectories(cfg: &ExperimentConfig, taus: &[f64], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let runs = sweep::run_trajectories(cfg, taus)?;
    let mut first_error = None;
    for run in &runs {
        match &run.result {
            Ok(traj) => format::write_trajectory(&dir.join(run.file_name()), &traj.samples)?,
            Err(e) => {
                eprintln!("trajectory k={} tau_q={}: {e}", run.k, run.tau_q);
                first_error.get_or_insert(*e);
            }
        }
    }
    println!("{} trajectories -> {}", runs.len(), dir.display());
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

