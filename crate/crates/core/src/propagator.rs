//! Integration of `i dψ/dt = H(t) ψ` for a single momentum mode.
//!
//! The integrator is the Dormand–Prince 5(4) embedded pair with first-same-as-last
//! reuse. Evolution under a non-Hermitian `H` does not conserve the norm, so
//! after each accepted step the state is rescaled to unit norm and the log of
//! the discarded factor is accumulated. Transition probabilities are degree
//! zero in the state, so the rescaling does not affect them.

use alloc::vec::Vec;

use num_traits::Float;

use crate::biortho::{self, BiorthoEigensystem, DEFAULT_EP_THRESHOLD};
use crate::error::{Error, Result};
use crate::linalg::{cabs, Mat2C, Vec2C, C64};
use crate::model::{bloch, QuenchProtocol};

/// Eigenvalues closer than this are treated as equal by the ground-state rule.
pub const GROUND_STATE_TIE_TOL: f64 = 1e-12;

/// Defectiveness above which the step cap is divided by the refine factor.
pub const EP_REFINE_TRIGGER: f64 = 0.5;

/// Step-size and tolerance settings for [`evolve`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    /// Absolute tolerance, measured relative to the current state norm so that
    /// the step sequence does not depend on the overall scale of ψ.
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// The step never exceeds `1 / steps_per_unit_time_min`.
    pub steps_per_unit_time_min: u32,
    pub ep_refine_factor: f64,
    pub ep_threshold: f64,
    /// Rescale ψ to unit norm after every accepted step.
    pub renormalize: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: 1.0,
            min_step: 1e-12,
            steps_per_unit_time_min: 64,
            ep_refine_factor: 8.0,
            ep_threshold: DEFAULT_EP_THRESHOLD,
            renormalize: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !(pos(self.rel_tol) && pos(self.abs_tol)) {
            return Err(Error::InvalidConfig("tolerances must be positive"));
        }
        if !(pos(self.max_step) && pos(self.min_step) && self.min_step < self.max_step) {
            return Err(Error::InvalidConfig("need 0 < min_step < max_step"));
        }
        if self.steps_per_unit_time_min == 0 {
            return Err(Error::InvalidConfig("steps_per_unit_time_min must be positive"));
        }
        if !(pos(self.ep_refine_factor) && self.ep_refine_factor >= 1.0) {
            return Err(Error::InvalidConfig("ep_refine_factor must be >= 1"));
        }
        if !(self.ep_threshold > 0.0 && self.ep_threshold < 1.0) {
            return Err(Error::InvalidConfig("ep_threshold must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Largest step the integrator will attempt away from exceptional points.
    pub fn step_cap(&self) -> f64 {
        self.max_step
            .min(1.0 / self.steps_per_unit_time_min as f64)
            .max(self.min_step)
    }
}

/// A state rescaled to unit norm; the physical state is `exp(log_scale)·psi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolvedState {
    pub psi: Vec2C,
    pub log_scale: f64,
    pub t: f64,
}

impl EvolvedState {
    /// The unrescaled state. Overflows for long PT-broken evolutions.
    pub fn physical(&self) -> Vec2C {
        self.psi.scale_real(self.log_scale.exp())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub p_ground: f64,
    pub p_excited: f64,
    /// Band 0 after continuity tracking.
    pub e_plus: C64,
    /// Band 1 after continuity tracking.
    pub e_minus: C64,
}

/// Time-resolved transition probabilities along one evolution.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub sample_stride: usize,
}

/// `H(t)` for one momentum mode, with the ramp reduced to linear coefficients.
#[derive(Clone, Copy, Debug)]
pub struct ModeDrive {
    pub k: f64,
    // (d_x, d_y, u) = offset + slope·t
    offset: [f64; 3],
    slope: [f64; 3],
    pub protocol: QuenchProtocol,
    pub tau_q: f64,
}

impl ModeDrive {
    pub fn new(k: f64, protocol: QuenchProtocol, tau_q: f64) -> Result<Self> {
        protocol.validate()?;
        if !(tau_q > 0.0 && tau_q.is_finite()) {
            return Err(Error::InvalidProtocol("tau_q must be positive"));
        }
        if !k.is_finite() {
            return Err(Error::InvalidParams("momentum must be finite"));
        }
        if protocol.end_time(tau_q) <= protocol.start_time(tau_q) {
            return Err(Error::InvalidProtocol("end offset exceeds the ramp duration"));
        }
        let (sin_k, cos_k) = k.sin_cos();
        let ([w0, v0, u0], [w1, v1, u1]) = protocol.linear_ramp(tau_q);
        Ok(ModeDrive {
            k,
            offset: [v0 + w0 * cos_k, w0 * sin_k, u0],
            slope: [v1 + w1 * cos_k, w1 * sin_k, u1],
            protocol,
            tau_q,
        })
    }

    /// `(d_x, d_y, u)` of `H(t) = d_x σx + d_y σy + i u σz`.
    #[inline]
    fn coefficients(&self, t: f64) -> (f64, f64, f64) {
        let [d0, y0, u0] = self.offset;
        let [d1, y1, u1] = self.slope;
        (d0 + d1 * t, y0 + y1 * t, u0 + u1 * t)
    }

    #[inline]
    pub fn hamiltonian(&self, t: f64) -> Mat2C {
        let (dx, dy, u) = self.coefficients(t);
        bloch(dx, dy, u)
    }

    /// `−i H(t) y`, written out for the Bloch form.
    #[inline]
    fn rhs(&self, t: f64, y: &Vec2C) -> Vec2C {
        let (dx, dy, u) = self.coefficients(t);
        let [a, b] = y.0;
        // −iH = [[u, −d_y − i d_x], [d_y − i d_x, −u]]
        Vec2C([
            C64::new(u * a.re - dy * b.re + dx * b.im, u * a.im - dy * b.im - dx * b.re),
            C64::new(dy * a.re + dx * a.im - u * b.re, dy * a.im - dx * a.re - u * b.im),
        ])
    }

    pub fn start_time(&self) -> f64 {
        self.protocol.start_time(self.tau_q)
    }

    pub fn end_time(&self) -> f64 {
        self.protocol.end_time(self.tau_q)
    }
}

/// Index of the ground band: the lower real eigenvalue when the spectrum is
/// real, otherwise the eigenvalue with the larger imaginary part (the least
/// dissipative state).
pub fn ground_index(eigenvalues: [C64; 2]) -> Result<usize> {
    let [a, b] = eigenvalues;
    let real = a.im.abs() <= GROUND_STATE_TIE_TOL && b.im.abs() <= GROUND_STATE_TIE_TOL;
    if real || (a.im - b.im).abs() <= GROUND_STATE_TIE_TOL {
        if (a.re - b.re).abs() <= GROUND_STATE_TIE_TOL {
            return Err(Error::DegenerateChoice);
        }
        Ok(if a.re < b.re { 0 } else { 1 })
    } else {
        Ok(if a.im > b.im { 0 } else { 1 })
    }
}

/// Unit-normalized right eigenvector of the ground band of `h0`.
pub fn initial_ground_state(h0: &Mat2C, ep_threshold: f64) -> Result<Vec2C> {
    let sys = biortho::eigensystem(h0, ep_threshold)?;
    let g = ground_index(sys.eigenvalues())?;
    sys.pair(g).right.normalized().ok_or(Error::ZeroState)
}

/// Reorder the bands of `next` to follow those of `prev`.
///
/// Chooses the permutation maximizing `Σ_n |⟨ũ_n^prev|u_n^next⟩|`; near-ties
/// fall back to eigenvalue continuity.
pub fn track_bands(prev: &BiorthoEigensystem, next: &BiorthoEigensystem) -> BiorthoEigensystem {
    let p = prev.pairs();
    let n = next.pairs();
    let overlap = |a: usize, b: usize| p[a].left.dot(&n[b].right).norm();
    let keep = overlap(0, 0) + overlap(1, 1);
    let swap = overlap(0, 1) + overlap(1, 0);
    let tie = (keep - swap).abs() <= 1e-12 * keep.max(swap).max(1.0);
    let do_swap = if tie {
        let e = |a: usize, b: usize| (p[a].eigenvalue - n[b].eigenvalue).norm();
        e(0, 1) + e(1, 0) < e(0, 0) + e(1, 1)
    } else {
        swap > keep
    };
    if do_swap {
        next.swapped()
    } else {
        *next
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy(y: &Vec2C, terms: &[(f64, &Vec2C)], h: f64) -> Vec2C {
    let mut out = *y;
    for (c, k) in terms {
        let s = c * h;
        out.0[0] += k.0[0] * s;
        out.0[1] += k.0[1] * s;
    }
    out
}

/// Integrate one mode through the protocol, starting from the ground state
/// of `H` at the protocol start time.
///
/// With `record = Some(stride)` a [`Trajectory`] is sampled at the start, at
/// every `stride`-th accepted step and at the end.
pub fn evolve(
    k: f64,
    protocol: QuenchProtocol,
    tau_q: f64,
    cfg: &IntegratorConfig,
    record: Option<usize>,
) -> Result<(EvolvedState, Option<Trajectory>)> {
    cfg.validate()?;
    let drive = ModeDrive::new(k, protocol, tau_q)?;
    let t0 = drive.start_time();
    let psi0 = initial_ground_state(&drive.hamiltonian(t0), cfg.ep_threshold)?;
    evolve_from(&drive, psi0, cfg, record)
}

/// Integrate from an arbitrary initial state at the drive's start time.
pub fn evolve_from(
    drive: &ModeDrive,
    psi0: Vec2C,
    cfg: &IntegratorConfig,
    record: Option<usize>,
) -> Result<(EvolvedState, Option<Trajectory>)> {
    cfg.validate()?;
    let t0 = drive.start_time();
    let t_end = drive.end_time();
    let mut recorder = record.map(|stride| Recorder::new(stride.max(1), cfg.ep_threshold));

    let mut t = t0;
    let mut y = psi0;
    let mut log_scale = 0.0;
    // product of discarded norms, folded into log_scale before it can overflow
    let mut pending = 1.0f64;
    if cfg.renormalize {
        let n = y.norm();
        if !(n > 0.0) {
            return Err(Error::ZeroState);
        }
        y = y.scale_real(n.recip());
        log_scale = n.ln();
    }
    if let Some(r) = recorder.as_mut() {
        r.sample(drive, t, &y)?;
    }

    let cap = cfg.step_cap();
    let span = t_end - t0;
    let mut h = cap.min(span);
    let mut ham_t = drive.hamiltonian(t);
    let mut k1 = drive.rhs(t, &y);
    let mut accepted = 0usize;

    while t < t_end {
        let defect = biortho::defectiveness(&ham_t);
        let local_cap = if defect > EP_REFINE_TRIGGER {
            (cap / cfg.ep_refine_factor).max(cfg.min_step)
        } else {
            cap
        };
        h = h.min(local_cap);
        let remaining = t_end - t;
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }

        let k2 = drive.rhs(t + C2 * h, &axpy(&y, &[(A21, &k1)], h));
        let k3 = drive.rhs(
            t + C3 * h,
            &axpy(&y, &[(A31, &k1), (A32, &k2)], h),
        );
        let k4 = drive.rhs(
            t + C4 * h,
            &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h),
        );
        let k5 = drive.rhs(
            t + C5 * h,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
        );
        let t_new = if last { t_end } else { t + h };
        let k6 = drive.rhs(
            t + h,
            &axpy(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                h,
            ),
        );
        let y_new = axpy(
            &y,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            h,
        );
        let k7 = drive.rhs(t_new, &y_new);
        let err_vec = axpy(
            &Vec2C::zero(),
            &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            h,
        );
        if !y_new.is_finite() {
            return Err(Error::NonFinite);
        }
        let norm = y.norm().max(y_new.norm());
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let mag = y.0[i].norm_sqr().max(y_new.0[i].norm_sqr()).sqrt();
            let sc = cfg.abs_tol * norm + cfg.rel_tol * mag;
            err = err.max(cabs(err_vec.0[i]) / sc);
        }

        if err <= 1.0 {
            t = t_new;
            y = y_new;
            k1 = k7;
            ham_t = drive.hamiltonian(t);
            if cfg.renormalize {
                let n = y.norm();
                if !(n > 0.0 && n.is_finite()) {
                    return Err(Error::NonFinite);
                }
                let inv = n.recip();
                y = y.scale_real(inv);
                k1 = k1.scale_real(inv);
                pending *= n;
                if !(1e-100..=1e100).contains(&pending) {
                    log_scale += pending.ln();
                    pending = 1.0;
                }
            }
            accepted += 1;
            if let Some(r) = recorder.as_mut() {
                if t >= t_end || accepted.is_multiple_of(r.stride) {
                    r.sample(drive, t, &y)?;
                }
            }
            // at the cap with err <= 0.9⁵ the growth factor is >= 1 anyway
            h = if h >= local_cap && err <= 0.59049 {
                local_cap
            } else {
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                (h * factor).min(local_cap)
            };
        } else {
            if h <= cfg.min_step {
                return Err(Error::StepUnderflow { t, defectiveness: defect });
            }
            let factor = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            h = (h * factor).max(cfg.min_step);
        }
    }

    // Probabilities are undefined if the run ends on an exceptional point.
    biortho::eigensystem(&drive.hamiltonian(t_end), cfg.ep_threshold)?;

    let state = EvolvedState {
        psi: y,
        log_scale: log_scale + pending.ln(),
        t: t_end,
    };
    Ok((state, recorder.map(Recorder::finish)))
}

/// Evolve with sampling enabled and return only the trajectory.
pub fn time_resolved(
    k: f64,
    protocol: QuenchProtocol,
    tau_q: f64,
    cfg: &IntegratorConfig,
    stride: usize,
) -> Result<Trajectory> {
    let (_, traj) = evolve(k, protocol, tau_q, cfg, Some(stride))?;
    Ok(traj.unwrap_or_default())
}

struct Recorder {
    stride: usize,
    ep_threshold: f64,
    prev: Option<BiorthoEigensystem>,
    samples: Vec<TrajectorySample>,
}

impl Recorder {
    fn new(stride: usize, ep_threshold: f64) -> Self {
        Recorder {
            stride,
            ep_threshold,
            prev: None,
            samples: Vec::new(),
        }
    }

    fn sample(&mut self, drive: &ModeDrive, t: f64, psi: &Vec2C) -> Result<()> {
        let sys = match biortho::eigensystem(&drive.hamiltonian(t), self.ep_threshold) {
            Ok(sys) => sys,
            // no probability exists on an exceptional point; skip the sample
            Err(Error::DefectiveMatrix { .. }) => return Ok(()),
            Err(e) => return Err(e),
        };
        let sys = match &self.prev {
            Some(prev) => track_bands(prev, &sys),
            None => sys,
        };
        let p = biortho::transition_probabilities(psi, &sys)?;
        let g = ground_index(sys.eigenvalues())?;
        let ev = sys.eigenvalues();
        self.samples.push(TrajectorySample {
            t,
            p_ground: p[g],
            p_excited: p[1 - g],
            e_plus: ev[0],
            e_minus: ev[1],
        });
        self.prev = Some(sys);
        Ok(())
    }

    fn finish(self) -> Trajectory {
        Trajectory {
            samples: self.samples,
            sample_stride: self.stride,
        }
    }
}
