//! Power-law fits, saturation plateaus, critical quench times and scaling
//! collapse of momentum-resolved excitation curves.

use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::wrapped_difference;

/// Minimum number of points for a log-log fit.
pub const MIN_FIT_POINTS: usize = 5;
/// Local log-log slope magnitude below which data count as flat.
pub const PLATEAU_SLOPE_THRESHOLD: f64 = 0.05;
/// Minimum number of points in a plateau window.
pub const MIN_PLATEAU_POINTS: usize = 3;
/// Minimum number of points per curve in a collapse.
pub const MIN_COLLAPSE_POINTS: usize = 10;

/// `y ≈ prefactor · x^exponent` from ordinary least squares in log-log space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub stderr_exponent: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub points: usize,
}

impl PowerLawFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.prefactor * x.powf(self.exponent)
    }
}

/// Fit `points` with `x` in the closed `window`.
pub fn fit_power_law(points: &[(f64, f64)], window: (f64, f64)) -> Result<PowerLawFit> {
    let (lo, hi) = window;
    let inside: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(x, _)| x >= lo && x <= hi)
        .collect();
    if inside.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            found: inside.len(),
            required: MIN_FIT_POINTS,
        });
    }
    if inside
        .iter()
        .any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::NonPositiveData);
    }
    let n = inside.len() as f64;
    let (sx, sy) = inside
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / n, sy / n);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in &inside {
        let dx = x.ln() - mx;
        let dy = y.ln() - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientPoints {
            found: 1,
            required: MIN_FIT_POINTS,
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = inside
        .iter()
        .map(|&(x, y)| {
            let r = y.ln() - (intercept + slope * x.ln());
            r * r
        })
        .sum::<f64>();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 {
        (1.0 - ssr / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(PowerLawFit {
        exponent: slope,
        prefactor: intercept.exp(),
        stderr_exponent: stderr,
        window,
        r_squared,
        points: inside.len(),
    })
}

/// Saturation value of `n_ex` in the fast-quench regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaturationReport {
    pub plateau: f64,
    pub plateau_window: (f64, f64),
    /// Intersection with the slow-quench power law, once known.
    pub tau_q_c: Option<f64>,
}

/// Mean of `y` over the longest run of points, starting at the smallest `x`,
/// whose consecutive log-log slopes all stay below the flatness threshold.
pub fn extract_plateau(points: &[(f64, f64)]) -> Result<SaturationReport> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    if pts.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::NonPositiveData);
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.len() < MIN_PLATEAU_POINTS {
        return Err(Error::InsufficientPoints {
            found: pts.len(),
            required: MIN_PLATEAU_POINTS,
        });
    }
    let mut end = 0;
    while end + 1 < pts.len() {
        let (x0, y0) = pts[end];
        let (x1, y1) = pts[end + 1];
        let slope = (y1.ln() - y0.ln()) / (x1.ln() - x0.ln());
        if !(slope.abs() < PLATEAU_SLOPE_THRESHOLD) {
            break;
        }
        end += 1;
    }
    let count = end + 1;
    if count < MIN_PLATEAU_POINTS {
        return Err(Error::NoPlateauDetected);
    }
    let plateau = pts[..count].iter().map(|p| p.1).sum::<f64>() / count as f64;
    Ok(SaturationReport {
        plateau,
        plateau_window: (pts[0].0, pts[end].0),
        tau_q_c: None,
    })
}

/// Quench time at which the fitted power law meets the plateau,
/// `(plateau/prefactor)^(1/exponent)`.
pub fn critical_quench_time(fit: &PowerLawFit, plateau: f64) -> Result<f64> {
    if !(fit.exponent < 0.0) {
        return Err(Error::NoIntersection {
            exponent: fit.exponent,
        });
    }
    if !(plateau > 0.0) {
        return Err(Error::NonPositiveData);
    }
    Ok((plateau / fit.prefactor).powf(fit.exponent.recip()))
}

/// Quality of a scaling collapse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollapseReport {
    pub z: f64,
    pub nu: f64,
    /// `zν/(zν+1)`, the power of `τ_Q` in the rescaled abscissa.
    pub beta: f64,
    /// Largest spread between interpolated curves on their common support,
    /// divided by the largest excitation value.
    pub residual: f64,
    pub support: (f64, f64),
}

/// A momentum-resolved curve `n_ex(k)` at one quench time.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeCurve {
    pub tau_q: f64,
    pub points: Vec<(f64, f64)>,
}

/// Signed rescaled abscissa `sgn(k−k_c)·|k−k_c|^z·τ_Q^β` with the momentum
/// difference wrapped into `(−π, π]`.
pub fn rescaled_abscissa(k: f64, k_c: f64, z: f64, tau_q: f64, beta: f64) -> f64 {
    let d = wrapped_difference(k, k_c);
    d.signum() * d.abs().powf(z) * tau_q.powf(beta)
}

/// Rescale each curve and report the collapse residual.
pub fn collapse(curves: &[ModeCurve], k_c: f64, z: f64, nu: f64) -> Result<CollapseReport> {
    if curves.len() < 2 {
        return Err(Error::InsufficientPoints {
            found: curves.len(),
            required: 2,
        });
    }
    let beta = z * nu / (z * nu + 1.0);
    let mut rescaled: Vec<Vec<(f64, f64)>> = Vec::with_capacity(curves.len());
    let mut y_max: f64 = 0.0;
    for c in curves {
        if c.points.len() < MIN_COLLAPSE_POINTS {
            return Err(Error::InsufficientPoints {
                found: c.points.len(),
                required: MIN_COLLAPSE_POINTS,
            });
        }
        let mut r: Vec<(f64, f64)> = c
            .points
            .iter()
            .map(|&(k, y)| (rescaled_abscissa(k, k_c, z, c.tau_q, beta), y))
            .collect();
        r.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(_, y) in &r {
            y_max = y_max.max(y.abs());
        }
        rescaled.push(r);
    }
    let lo = rescaled
        .iter()
        .map(|r| r[0].0)
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = rescaled
        .iter()
        .map(|r| r[r.len() - 1].0)
        .fold(f64::INFINITY, f64::min);
    if !(hi > lo) {
        return Err(Error::NoOverlap);
    }
    let mut abscissae: Vec<f64> = rescaled
        .iter()
        .flat_map(|r| r.iter().map(|p| p.0))
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    abscissae.push(lo);
    abscissae.push(hi);
    let mut spread: f64 = 0.0;
    for &x in &abscissae {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for r in &rescaled {
            let y = interpolate(r, x);
            min = min.min(y);
            max = max.max(y);
        }
        spread = spread.max(max - min);
    }
    let residual = if y_max > 0.0 { spread / y_max } else { 0.0 };
    Ok(CollapseReport {
        z,
        nu,
        beta,
        residual,
        support: (lo, hi),
    })
}

/// Piecewise-linear interpolation on sorted abscissae; `x` must lie within range.
fn interpolate(pts: &[(f64, f64)], x: f64) -> f64 {
    let idx = pts.partition_point(|p| p.0 < x);
    if idx == 0 {
        return pts[0].1;
    }
    if idx >= pts.len() {
        return pts[pts.len() - 1].1;
    }
    let (x0, y0) = pts[idx - 1];
    let (x1, y1) = pts[idx];
    if x1 == x0 {
        return 0.5 * (y0 + y1);
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}
