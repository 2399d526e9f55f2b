//! Reports built from sweep files: power-law fits with saturation plateaus,
//! scaling collapses and the defect-freezing summary.

use std::collections::BTreeMap;

use biokz::{
    collapse, critical_quench_time, extract_plateau, fit_power_law, Method, ModeCurve, PowerLawFit,
};
use biokz::model::wrapped_difference;
use biokz::scaling::rescaled_abscissa;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::format::{DensityRow, ModeRow};

/// Slow-quench fit window used unless overridden.
pub const DEFAULT_FIT_WINDOW: (f64, f64) = (1e2, 1e4);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitSummary {
    pub exponent: f64,
    pub prefactor: f64,
    pub stderr_exponent: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub points: usize,
}

impl From<PowerLawFit> for FitSummary {
    fn from(f: PowerLawFit) -> Self {
        FitSummary {
            exponent: f.exponent,
            prefactor: f.prefactor,
            stderr_exponent: f.stderr_exponent,
            window: f.window,
            r_squared: f.r_squared,
            points: f.points,
        }
    }
}

/// Fit of one `(protocol, method, ε_i)` series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupFit {
    pub protocol: String,
    pub method: &'static str,
    pub eps_i: f64,
    pub points: usize,
    pub failed_points: usize,
    pub fit: Option<FitSummary>,
    pub fit_error: Option<String>,
    pub plateau: Option<f64>,
    pub plateau_window: Option<(f64, f64)>,
    pub plateau_error: Option<String>,
    pub tau_q_c: Option<f64>,
    pub tau_q_c_error: Option<String>,
}

/// Power laws across ε_i of the plateau and of `τ_Q^c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossFit {
    pub protocol: String,
    pub method: &'static str,
    pub plateau_vs_eps: Option<FitSummary>,
    pub plateau_vs_eps_error: Option<String>,
    pub tau_q_c_vs_eps: Option<FitSummary>,
    pub tau_q_c_vs_eps_error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub window: (f64, f64),
    pub groups: Vec<GroupFit>,
    pub across_eps: Vec<CrossFit>,
}

impl FitReport {
    pub fn group(&self, method: Method, eps_i: f64) -> Option<&GroupFit> {
        self.groups
            .iter()
            .find(|g| g.method == method.name() && g.eps_i == eps_i)
    }
}

fn split<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> (Option<T>, Option<String>) {
    match r {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

fn whole_line(points: &[(f64, f64)]) -> std::result::Result<FitSummary, biokz::Error> {
    fit_power_law(points, (0.0, f64::INFINITY)).map(FitSummary::from)
}

/// Per-series slow-quench fit, fast-quench plateau and their crossing, plus
/// the ε_i dependence of plateau and crossing for each protocol and method.
pub fn fit_report(rows: &[DensityRow], window: (f64, f64)) -> Result<FitReport> {
    if rows.is_empty() {
        return Err(CliError::Invalid("no density rows to fit".into()));
    }
    if !(window.0 < window.1) {
        return Err(CliError::Invalid("fit window must satisfy min < max".into()));
    }
    let mut order: Vec<(String, Method, f64)> = Vec::new();
    // (points, failed-row count) per (protocol, method, ε_i bits)
    type Series = (Vec<(f64, f64)>, usize);
    let mut series: BTreeMap<(String, Method, u64), Series> = BTreeMap::new();
    for r in rows {
        let key = (r.protocol.clone(), r.method, r.eps_i.to_bits());
        let entry = series.entry(key).or_insert_with(|| {
            order.push((r.protocol.clone(), r.method, r.eps_i));
            (Vec::new(), 0)
        });
        if r.is_ok() {
            entry.0.push((r.tau_q, r.n_ex));
        } else {
            entry.1 += 1;
        }
    }
    let mut groups = Vec::new();
    for (protocol, method, eps_i) in order {
        let (points, failed) = &series[&(protocol.clone(), method, eps_i.to_bits())];
        let (fit, fit_error) = split(fit_power_law(points, window));
        let (sat, plateau_error) = split(extract_plateau(points));
        let (tau_q_c, tau_q_c_error) = match (&fit, &sat) {
            (Some(f), Some(s)) => split(critical_quench_time(f, s.plateau)),
            _ => (None, Some("needs both a fit and a plateau".into())),
        };
        groups.push(GroupFit {
            protocol,
            method: method.name(),
            eps_i,
            points: points.len(),
            failed_points: *failed,
            fit: fit.map(FitSummary::from),
            fit_error,
            plateau: sat.map(|s| s.plateau),
            plateau_window: sat.map(|s| s.plateau_window),
            plateau_error,
            tau_q_c,
            tau_q_c_error,
        });
    }
    let mut across_eps = Vec::new();
    let mut seen: Vec<(String, &'static str)> = Vec::new();
    for g in &groups {
        let key = (g.protocol.clone(), g.method);
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let members: Vec<&GroupFit> = groups
            .iter()
            .filter(|h| h.protocol == g.protocol && h.method == g.method)
            .collect();
        if members.len() < 2 {
            continue;
        }
        let plateaus: Vec<(f64, f64)> = members
            .iter()
            .filter_map(|h| h.plateau.map(|p| (h.eps_i, p)))
            .collect();
        let crossings: Vec<(f64, f64)> = members
            .iter()
            .filter_map(|h| h.tau_q_c.map(|t| (h.eps_i, t)))
            .collect();
        let (plateau_vs_eps, plateau_vs_eps_error) = split(whole_line(&plateaus));
        let (tau_q_c_vs_eps, tau_q_c_vs_eps_error) = split(whole_line(&crossings));
        across_eps.push(CrossFit {
            protocol: g.protocol.clone(),
            method: g.method,
            plateau_vs_eps,
            plateau_vs_eps_error,
            tau_q_c_vs_eps,
            tau_q_c_vs_eps_error,
        });
    }
    Ok(FitReport {
        window,
        groups,
        across_eps,
    })
}

/// Inputs to a collapse: a fixed `(z, ν)` is a one-point grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseSpec {
    pub k_c: f64,
    pub z: Vec<f64>,
    pub nu: Vec<f64>,
    /// Keep modes with `|k − k_c|` (wrapped) at most this far from `k_c`.
    pub half_width: Option<f64>,
    pub method: Method,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CollapsePoint {
    pub z: f64,
    pub nu: f64,
    pub beta: f64,
    pub residual: Option<f64>,
    pub support: Option<(f64, f64)>,
    pub error: Option<&'static str>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollapseOutcome {
    pub k_c: f64,
    pub half_width: Option<f64>,
    pub method: &'static str,
    pub tau_q: Vec<f64>,
    pub grid: Vec<CollapsePoint>,
    /// Grid point with the smallest residual.
    pub best: Option<CollapsePoint>,
    /// `tau_q, x, n_ex_k` rows rescaled with `best`.
    #[serde(skip)]
    pub rescaled: Vec<Vec<f64>>,
}

/// Momentum curves per quench time from mode rows of a single instance.
pub fn curves_from_modes(rows: &[ModeRow], method: Method, k_c: f64, half_width: Option<f64>) -> Result<Vec<ModeCurve>> {
    let mut instance: Option<(&str, f64)> = None;
    let mut by_tau: BTreeMap<u64, ModeCurve> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.method == method) {
        match instance {
            None => instance = Some((&r.protocol, r.eps_i)),
            Some((p, e)) if p != r.protocol || e != r.eps_i => {
                return Err(CliError::Invalid("collapse input mixes protocol instances".into()))
            }
            _ => {}
        }
        if !r.is_ok() {
            continue;
        }
        if half_width.is_some_and(|w| wrapped_difference(r.k, k_c).abs() > w) {
            continue;
        }
        by_tau
            .entry(r.tau_q.to_bits())
            .or_insert_with(|| ModeCurve {
                tau_q: r.tau_q,
                points: Vec::new(),
            })
            .points
            .push((r.k, r.n_ex_k));
    }
    let mut curves: Vec<ModeCurve> = by_tau.into_values().collect();
    curves.sort_by(|a, b| a.tau_q.total_cmp(&b.tau_q));
    Ok(curves)
}

pub fn collapse_report(curves: &[ModeCurve], spec: &CollapseSpec) -> Result<CollapseOutcome> {
    if spec.z.is_empty() || spec.nu.is_empty() {
        return Err(CliError::Invalid("collapse needs at least one z and one nu".into()));
    }
    let mut grid = Vec::new();
    for &z in &spec.z {
        for &nu in &spec.nu {
            let beta = z * nu / (z * nu + 1.0);
            grid.push(match collapse(curves, spec.k_c, z, nu) {
                Ok(r) => CollapsePoint {
                    z,
                    nu,
                    beta,
                    residual: Some(r.residual),
                    support: Some(r.support),
                    error: None,
                },
                Err(e) => CollapsePoint {
                    z,
                    nu,
                    beta,
                    residual: None,
                    support: None,
                    error: Some(e.kind()),
                },
            });
        }
    }
    let best = grid
        .iter()
        .filter(|p| p.residual.is_some())
        .min_by(|a, b| a.residual.unwrap().total_cmp(&b.residual.unwrap()))
        .copied();
    if best.is_none() && grid.len() == 1 {
        // a single requested point that failed is an error, not a report
        collapse(curves, spec.k_c, spec.z[0], spec.nu[0])?;
    }
    let mut rescaled = Vec::new();
    if let Some(b) = best {
        for c in curves {
            let mut pts: Vec<Vec<f64>> = c
                .points
                .iter()
                .map(|&(k, y)| vec![c.tau_q, rescaled_abscissa(k, spec.k_c, b.z, c.tau_q, b.beta), y])
                .collect();
            pts.sort_by(|a, b| a[1].total_cmp(&b[1]));
            rescaled.extend(pts);
        }
    }
    Ok(CollapseOutcome {
        k_c: spec.k_c,
        half_width: spec.half_width,
        method: spec.method.name(),
        tau_q: curves.iter().map(|c| c.tau_q).collect(),
        grid,
        best,
        rescaled,
    })
}

/// Relative flatness tolerance of the large-τ_Q tail.
pub const FREEZE_FLATNESS: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreezeReport {
    pub method: &'static str,
    /// Quench times in the last decade of the scan.
    pub tail: Vec<f64>,
    /// `(max − min)/mean` of `n_ex` over the tail.
    pub tail_spread: f64,
    pub flat: bool,
    /// Mean tail density, reported when the tail is flat.
    pub n_0: Option<f64>,
    pub final_broken_share: f64,
}

/// Plateau of `n_ex(τ_Q)` over the last decade of `rows` (one method).
pub fn freeze_report(rows: &[DensityRow], method: Method) -> Result<FreezeReport> {
    let mut pts: Vec<&DensityRow> = rows
        .iter()
        .filter(|r| r.method == method && r.is_ok())
        .collect();
    pts.sort_by(|a, b| a.tau_q.total_cmp(&b.tau_q));
    let last = pts
        .last()
        .ok_or_else(|| CliError::Invalid("no successful density rows".into()))?;
    let tau_max = last.tau_q;
    let tail: Vec<&DensityRow> = pts
        .iter()
        .copied()
        .filter(|r| r.tau_q >= tau_max / 10.0 * (1.0 - 1e-12))
        .collect();
    let mean = tail.iter().map(|r| r.n_ex).sum::<f64>() / tail.len() as f64;
    let max = tail.iter().map(|r| r.n_ex).fold(f64::NEG_INFINITY, f64::max);
    let min = tail.iter().map(|r| r.n_ex).fold(f64::INFINITY, f64::min);
    let spread = if mean > 0.0 { (max - min) / mean } else { f64::INFINITY };
    let flat = tail.len() >= 2 && spread < FREEZE_FLATNESS;
    Ok(FreezeReport {
        method: method.name(),
        tail: tail.iter().map(|r| r.tau_q).collect(),
        tail_spread: spread,
        flat,
        n_0: flat.then_some(mean),
        final_broken_share: last.broken_share,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::STATUS_OK;

    fn row(eps_i: f64, tau_q: f64, n_ex: f64) -> DensityRow {
        DensityRow {
            protocol: "pt_symmetric".into(),
            eps_i,
            tau_q,
            len: 64,
            method: Method::Biorthogonal,
            n_ex,
            broken_share: 0.0,
            status: STATUS_OK.into(),
        }
    }

    #[test]
    fn exact_power_law_gives_exact_exponent() {
        let rows: Vec<_> = (0..=16)
            .map(|j| {
                let t = 10f64.powf(2.0 + j as f64 / 8.0);
                row(0.2, t, 0.7 * t.powf(-0.25))
            })
            .collect();
        let rep = fit_report(&rows, DEFAULT_FIT_WINDOW).unwrap();
        let f = rep.groups[0].fit.unwrap();
        assert!((f.exponent + 0.25).abs() < 1e-12);
        assert!((f.prefactor - 0.7).abs() < 1e-12);
        assert!(rep.groups[0].plateau.is_none());
    }

    #[test]
    fn crossing_from_plateau_and_tail() {
        // n = min(c ε^a, τ^-b) style data with a clean plateau
        let mut rows = Vec::new();
        for eps in [0.1f64, 0.15, 0.2, 0.3, 0.45] {
            let plateau: f64 = 0.1 * eps.powf(0.5);
            for j in -16..=32 {
                let t = 10f64.powf(j as f64 / 8.0);
                rows.push(row(eps, t, plateau.min(0.05 * t.powf(-0.5))));
            }
        }
        let rep = fit_report(&rows, DEFAULT_FIT_WINDOW).unwrap();
        assert_eq!(rep.groups.len(), 5);
        for g in &rep.groups {
            let p = 0.1 * g.eps_i.powf(0.5);
            // the run may swallow one point just past the kink
            let plateau = g.plateau.unwrap();
            assert!((plateau / p - 1.0).abs() < 5e-3, "{plateau} vs {p}");
            let expect = (plateau / 0.05).powf(-2.0);
            assert!((g.tau_q_c.unwrap() / expect - 1.0).abs() < 1e-9);
        }
        let x = &rep.across_eps[0];
        assert!((x.plateau_vs_eps.unwrap().exponent - 0.5).abs() < 1e-2);
        assert!((x.tau_q_c_vs_eps.unwrap().exponent + 1.0).abs() < 2e-2);
    }

    #[test]
    fn freeze_tail_flatness() {
        let rows: Vec<_> = (0..=8)
            .map(|j| row(0.0, 10f64.powf(2.0 + j as f64 / 4.0), 0.08 + 1e-4 * j as f64))
            .collect();
        let rep = freeze_report(&rows, Method::Biorthogonal).unwrap();
        assert_eq!(rep.tail.len(), 5);
        assert!(rep.flat);
        assert!((rep.n_0.unwrap() - 0.0806).abs() < 1e-12);
    }
}
