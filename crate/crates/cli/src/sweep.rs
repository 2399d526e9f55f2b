//! Parallel momentum sweeps.
//!
//! One work item is one `(protocol instance, τ_Q, k)` triple. Items run on a
//! bounded rayon pool and come back in submission order, so the reduction
//! into densities is sequential and independent of the worker count.

use std::path::{Path, PathBuf};
use std::time::Instant;

use biokz::{density, k_grid, observables, Error, Method, ModeExcitation, MomentumGrid, QuenchProtocol};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{protocol_label, ExperimentConfig, Instance};
use crate::error::{CliError, Result};
use crate::format::{self, DensityRow, ModeRow, STATUS_OK};

/// One density row plus provenance of the run that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub protocol: String,
    pub eps_i: f64,
    pub tau_q: f64,
    #[serde(rename = "L")]
    pub len: usize,
    pub method: &'static str,
    pub n_ex: f64,
    pub broken_share: f64,
    pub status: String,
    pub config_hash: String,
    /// Summed evaluation time of this group's modes, in seconds.
    pub compute_time_s: f64,
}

/// All modes of one `(instance, τ_Q)` group.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeGroup {
    pub instance: usize,
    pub tau_index: usize,
    pub rows: Vec<ModeRow>,
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub density: Vec<DensityRow>,
    pub records: Vec<SweepRecord>,
    pub modes: Vec<ModeGroup>,
    pub config_hash: String,
    pub wall_time_s: f64,
}

impl SweepOutput {
    /// Density rows of one method, in output order.
    pub fn rows(&self, method: Method) -> impl Iterator<Item = &DensityRow> {
        self.density.iter().filter(move |r| r.method == method)
    }
}

/// Instances in output order: configuration section order, then ascending ε_i.
pub fn ordered_instances(cfg: &ExperimentConfig) -> Vec<Instance> {
    cfg.protocols
        .iter()
        .flat_map(|spec| {
            let mut v = spec.instances();
            v.sort_by(|a, b| a.eps_i.total_cmp(&b.eps_i));
            v
        })
        .collect()
}

pub fn grid_for(cfg: &ExperimentConfig, protocol: &QuenchProtocol) -> Result<MomentumGrid> {
    Ok(k_grid(cfg.len, cfg.exclusion_radius, protocol.ep_momenta())?)
}

pub fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Invalid(format!("cannot start worker pool: {e}")))
}

struct Group {
    instance: usize,
    tau_index: usize,
    protocol: QuenchProtocol,
    eps_i: f64,
    grid: MomentumGrid,
    /// Source index per grid point: itself, or its evaluated mirror partner.
    source: Vec<usize>,
}

type ModeOutcome = (std::result::Result<Vec<ModeExcitation>, Error>, f64);

/// Evaluate every configured group. Numerical failures are recorded in the
/// status columns and never abort the sweep.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepOutput> {
    cfg.validate()?;
    let started = Instant::now();
    let hash = cfg.hash();
    let methods = cfg.method.methods();

    let mut groups = Vec::new();
    for (instance, inst) in ordered_instances(cfg).into_iter().enumerate() {
        let protocol = inst.protocol;
        let grid = grid_for(cfg, &protocol)?;
        let mirror = cfg.mirror && protocol.k_even();
        let source: Vec<usize> = (0..grid.len())
            .map(|m| match grid.mirror_index(m) {
                Some(j) if mirror && j < m => j,
                _ => m,
            })
            .collect();
        for tau_index in 0..cfg.tau_q.len() {
            groups.push(Group {
                instance,
                tau_index,
                protocol,
                eps_i: inst.eps_i,
                grid: grid.clone(),
                source: source.clone(),
            });
        }
    }

    let items: Vec<(usize, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, group)| {
            (0..group.grid.len())
                .filter(|&m| group.source[m] == m)
                .map(move |m| (g, m))
        })
        .collect();

    let pool = thread_pool(cfg.workers)?;
    let outcomes: Vec<ModeOutcome> = pool.install(|| {
        items
            .par_iter()
            .map(|&(g, m)| {
                let group = &groups[g];
                let tau_q = cfg.tau_q[group.tau_index];
                let ramp = cfg.clock.ramp_time(&group.protocol, tau_q);
                let k = group.grid.momenta()[m];
                let t0 = Instant::now();
                let res = observables::evolve_mode(k, group.protocol, ramp, &cfg.integrator, methods);
                (res, t0.elapsed().as_secs_f64())
            })
            .collect()
    });

    let mut out = SweepOutput {
        density: Vec::new(),
        records: Vec::new(),
        modes: Vec::new(),
        config_hash: hash.clone(),
        wall_time_s: 0.0,
    };
    let mut cursor = 0;
    for group in &groups {
        let len = group.grid.len();
        let mut evaluated: Vec<Option<&ModeOutcome>> = vec![None; len];
        for (m, slot) in evaluated.iter_mut().enumerate() {
            if group.source[m] == m {
                *slot = Some(&outcomes[cursor]);
                cursor += 1;
            }
        }
        let tau_q = cfg.tau_q[group.tau_index];
        let ramp = cfg.clock.ramp_time(&group.protocol, tau_q);
        let label = protocol_label(&group.protocol);
        let eps_i = group.eps_i;
        let compute: f64 = evaluated.iter().flatten().map(|o| o.1).sum();

        let mut rows = Vec::with_capacity(len * methods.len());
        for (mi, &method) in methods.iter().enumerate() {
            let mut modes = Vec::with_capacity(len);
            let mut first_error: Option<String> = None;
            for (m, &k) in group.grid.momenta().iter().enumerate() {
                let (n_ex_k, status) = match &evaluated[group.source[m]].expect("source evaluated").0 {
                    Ok(ex) => (ex[mi].n_ex_k, STATUS_OK.to_string()),
                    Err(e) => (f64::NAN, format::error_status(e)),
                };
                if status != STATUS_OK && first_error.is_none() {
                    first_error = Some(status.clone());
                }
                modes.push(ModeExcitation { k, n_ex_k, method });
                rows.push(ModeRow {
                    protocol: label.clone(),
                    eps_i,
                    tau_q,
                    k,
                    n_ex_k,
                    method,
                    status,
                });
            }
            let d = density(&modes, &group.grid, group.protocol, ramp)?;
            let status = first_error.unwrap_or_else(|| STATUS_OK.to_string());
            let (n_ex, broken_share) = if status == STATUS_OK {
                (d.n_ex, d.broken_mode_share)
            } else {
                (f64::NAN, f64::NAN)
            };
            out.density.push(DensityRow {
                protocol: label.clone(),
                eps_i,
                tau_q,
                len,
                method,
                n_ex,
                broken_share,
                status: status.clone(),
            });
            out.records.push(SweepRecord {
                protocol: label.clone(),
                eps_i,
                tau_q,
                len,
                method: method.name(),
                n_ex,
                broken_share,
                status,
                config_hash: hash.clone(),
                compute_time_s: compute,
            });
        }
        // k-major, method-minor
        rows.sort_by(|a, b| a.k.total_cmp(&b.k).then(a.method.cmp(&b.method)));
        out.modes.push(ModeGroup {
            instance: group.instance,
            tau_index: group.tau_index,
            rows,
        });
    }
    out.wall_time_s = started.elapsed().as_secs_f64();
    Ok(out)
}

pub fn mode_file_name(instance: usize, tau_index: usize) -> String {
    format!("p{instance}_t{tau_index:03}.csv")
}

#[derive(Serialize)]
struct RecordsFile<'a> {
    config_hash: &'a str,
    wall_time_s: f64,
    records: &'a [SweepRecord],
}

/// Write `density.csv`, `modes/p{instance}_t{tau}.csv` and `records.json`.
/// Only `records.json` carries timing.
pub fn write_sweep(dir: &Path, out: &SweepOutput) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir.join("modes"))?;
    let mut written = vec![dir.join("density.csv")];
    format::write_density(&written[0], &out.density)?;
    for g in &out.modes {
        let path = dir.join("modes").join(mode_file_name(g.instance, g.tau_index));
        format::write_modes(&path, &g.rows)?;
        written.push(path);
    }
    let records = dir.join("records.json");
    format::write_json(
        &records,
        &RecordsFile {
            config_hash: &out.config_hash,
            wall_time_s: out.wall_time_s,
            records: &out.records,
        },
    )?;
    written.push(records);
    Ok(written)
}

/// Trajectories for every configured `(instance, τ_Q, k)` with `k` from the
/// `[trajectory]` section, evaluated in parallel.
pub fn run_trajectories(cfg: &ExperimentConfig, taus: &[f64]) -> Result<Vec<TrajectoryRun>> {
    cfg.validate()?;
    if cfg.trajectory.k.is_empty() {
        return Err(CliError::Invalid("[trajectory] needs at least one `k`".into()));
    }
    let mut jobs = Vec::new();
    for (instance, inst) in ordered_instances(cfg).into_iter().enumerate() {
        let protocol = inst.protocol;
        for (tau_index, &tau_q) in taus.iter().enumerate() {
            for (k_index, &k) in cfg.trajectory.k.iter().enumerate() {
                jobs.push((instance, protocol, tau_index, tau_q, k_index, k));
            }
        }
    }
    let stride = cfg.trajectory.stride.max(1);
    let pool = thread_pool(cfg.workers)?;
    let runs: Vec<TrajectoryRun> = pool.install(|| {
        jobs.par_iter()
            .map(|&(instance, protocol, tau_index, tau_q, k_index, k)| {
                let ramp = cfg.clock.ramp_time(&protocol, tau_q);
                TrajectoryRun {
                    instance,
                    tau_index,
                    k_index,
                    k,
                    tau_q,
                    result: biokz::time_resolved(k, protocol, ramp, &cfg.integrator, stride),
                }
            })
            .collect()
    });
    Ok(runs)
}

#[derive(Clone, Debug)]
pub struct TrajectoryRun {
    pub instance: usize,
    pub tau_index: usize,
    pub k_index: usize,
    pub k: f64,
    pub tau_q: f64,
    pub result: std::result::Result<biokz::Trajectory, Error>,
}

impl TrajectoryRun {
    pub fn file_name(&self) -> String {
        format!("traj_p{}_t{:03}_k{}.csv", self.instance, self.tau_index, self.k_index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ProtocolKind, ProtocolSpec};
    use biokz::EndOffset;

    fn small(kind: ProtocolKind, eps: Vec<f64>) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(
            ProtocolSpec {
                kind,
                eps_i: eps,
                u: 0.5,
                end_offset: EndOffset::Auto,
            },
            16,
            vec![1.0, 3.0],
        );
        cfg.workers = Some(2);
        cfg
    }

    #[test]
    fn mirrored_sweep_matches_full_sweep() {
        let mut cfg = small(ProtocolKind::NonHermitian, vec![0.5]);
        let half = run_sweep(&cfg).unwrap();
        cfg.mirror = false;
        let full = run_sweep(&cfg).unwrap();
        for (a, b) in half.density.iter().zip(&full.density) {
            assert!((a.n_ex - b.n_ex).abs() < 1e-8, "{} vs {}", a.n_ex, b.n_ex);
        }
    }

    #[test]
    fn output_is_ordered_by_eps_then_tau() {
        let cfg = small(ProtocolKind::PtSymmetric, vec![0.3, 0.1]);
        let out = run_sweep(&cfg).unwrap();
        let keys: Vec<(f64, f64)> = out.density.iter().map(|r| (r.eps_i, r.tau_q)).collect();
        assert_eq!(keys, vec![(0.1, 1.0), (0.1, 3.0), (0.3, 1.0), (0.3, 3.0)]);
        assert!(out.density.iter().all(|r| r.is_ok()));
        for g in &out.modes {
            assert!(g.rows.windows(2).all(|w| w[0].k < w[1].k));
        }
    }

    #[test]
    fn failing_modes_are_marked_not_fatal() {
        let mut cfg = small(ProtocolKind::PtSymmetric, vec![0.3]);
        // a step floor this coarse cannot meet the tolerance
        cfg.integrator.min_step = 0.01;
        cfg.integrator.rel_tol = 1e-14;
        cfg.integrator.abs_tol = 1e-14;
        let out = run_sweep(&cfg).unwrap();
        assert!(out.density.iter().all(|r| r.status.starts_with("err:") && r.n_ex.is_nan()));
        assert_eq!(out.modes[0].rows.len(), 16);
    }
}
