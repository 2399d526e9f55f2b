//! The non-Hermitian SSH Bloch Hamiltonian
//! `H_k = (v + w cos k)σx + w sin k σy + i u σz`, its spectrum and phases,
//! momentum grids, and the three linear quench protocols.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{Mat2C, C64};

/// Hopping amplitudes `w`, `v` and gain/loss strength `u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SshParams {
    pub w: f64,
    pub v: f64,
    pub u: f64,
}

impl SshParams {
    pub fn new(w: f64, v: f64, u: f64) -> Result<Self> {
        if !(w.is_finite() && v.is_finite() && u.is_finite()) {
            return Err(Error::InvalidParams("parameters must be finite"));
        }
        if w <= 0.0 {
            return Err(Error::InvalidParams("w must be positive"));
        }
        if v < 0.0 || u < 0.0 {
            return Err(Error::InvalidParams("v and u must be non-negative"));
        }
        Ok(SshParams { w, v, u })
    }
}

/// Bloch Hamiltonian at momentum `k`.
pub fn hamiltonian(k: f64, p: &SshParams) -> Mat2C {
    let (s, c) = k.sin_cos();
    bloch(p.w * c + p.v, p.w * s, p.u)
}

#[inline]
pub(crate) fn bloch(dx: f64, dy: f64, u: f64) -> Mat2C {
    Mat2C::new(
        C64::new(0.0, u),
        C64::new(dx, -dy),
        C64::new(dx, dy),
        C64::new(0.0, -u),
    )
}

/// `|w−v|² + 2wv(1+cos k) − u²`, the square of the band energy.
pub fn radicand(k: f64, p: &SshParams) -> f64 {
    let d = p.w - p.v;
    d * d + 2.0 * p.w * p.v * (1.0 + k.cos()) - p.u * p.u
}

/// Upper band energy `E_{k,+}`; the lower band is its negative. Real for
/// PT-unbroken modes and positive imaginary for broken ones.
pub fn spectrum(k: f64, p: &SshParams) -> C64 {
    let r = radicand(k, p);
    if r >= 0.0 {
        C64::new(r.sqrt(), 0.0)
    } else {
        C64::new(0.0, (-r).sqrt())
    }
}

/// `(PT) H (PT)⁻¹` with `P = σz` and `T = −iσy K`.
///
/// Writing the antiunitary as `U·K` with `U = σz·(−iσy)`, conjugation acts as
/// `H ↦ U H* U⁻¹`.
pub fn pt_conjugate(h: &Mat2C) -> Mat2C {
    let minus_i = C64::new(0.0, -1.0);
    let u = Mat2C::sigma_z() * Mat2C::sigma_y().scale(minus_i);
    let u_inv = u.inverse().expect("PT unitary part is invertible");
    u * h.conj() * u_inv
}

/// Phases of the infinite system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    PtSymmetricTopological,
    PtSymmetricTrivial,
    PtBroken,
}

/// Classify by `w − v` against `u`; the boundary `|w − v| = u` counts as broken.
pub fn phase_classify(p: &SshParams) -> Phase {
    let d = p.w - p.v;
    if d > p.u {
        Phase::PtSymmetricTopological
    } else if d < -p.u {
        Phase::PtSymmetricTrivial
    } else {
        Phase::PtBroken
    }
}

/// Upper bound of the automatic end offset: one step at the default
/// integrator step cap.
pub const DEFAULT_END_OFFSET: f64 = 1.0 / 64.0;

/// Automatic end offset as a fraction of the ramp duration, for short ramps.
pub const DEFAULT_END_FRACTION: f64 = 1e-4;

/// How far before the nominal ramp end the evolution stops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EndOffset {
    /// `min(DEFAULT_END_OFFSET, DEFAULT_END_FRACTION·τ_Q)`: one default step for
    /// slow ramps, while fast ramps still stop close to the critical point.
    Auto,
    /// A fixed time offset.
    Fixed(f64),
}

impl EndOffset {
    pub fn resolve(&self, tau_q: f64) -> f64 {
        match *self {
            EndOffset::Auto => DEFAULT_END_OFFSET.min(DEFAULT_END_FRACTION * tau_q),
            EndOffset::Fixed(d) => d,
        }
    }
}

/// Meaning of `τ_Q` for the ramps toward a critical point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RampClock {
    /// The ramp lasts `τ_Q`; its rate is `ε_i/τ_Q`.
    #[default]
    Duration,
    /// The reduced parameter moves at rate `1/τ_Q`, so the ramp lasts `ε_i·τ_Q`.
    /// Slow-quench curves for different `ε_i` then share one `τ_Q` axis.
    Rate,
}

impl RampClock {
    /// Ramp duration handed to the protocol for a nominal `τ_Q`.
    pub fn ramp_time(&self, protocol: &QuenchProtocol, tau_q: f64) -> f64 {
        match (self, protocol) {
            (RampClock::Rate, QuenchProtocol::PtSymmetricV { .. })
            | (RampClock::Rate, QuenchProtocol::NonHermitianU { .. }) => protocol.eps_i() * tau_q,
            _ => tau_q,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RampClock::Duration => "duration",
            RampClock::Rate => "rate",
        }
    }
}

/// A linear ramp of one model parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuenchProtocol {
    /// `w = 1`, fixed `u`; `v(t) − v_c = v_i (1 − t/τ_Q)` on `[0, τ_Q − δ_end]`
    /// with `v_c = w + u`.
    PtSymmetricV {
        v_i: f64,
        u: f64,
        end_offset: EndOffset,
    },
    /// `v = w = 1`; `u(t) = u_c − u_i (1 − t/τ_Q)` on `[0, τ_Q − δ_end]`, `u_c = 1`.
    NonHermitianU { u_i: f64, end_offset: EndOffset },
    /// `w = 1`, `u = 1/2`; `v(t) = 1 + t/τ_Q` on `[−τ_Q, τ_Q]`.
    ThroughBroken,
}

impl QuenchProtocol {
    /// Ramp of `v` toward the exceptional point at `v_c = 3/2` (gain/loss 1/2).
    pub fn pt_symmetric(v_i: f64) -> Self {
        QuenchProtocol::PtSymmetricV {
            v_i,
            u: 0.5,
            end_offset: EndOffset::Auto,
        }
    }

    /// Ramp of the gain/loss strength toward `u_c = 1`.
    pub fn non_hermitian(u_i: f64) -> Self {
        QuenchProtocol::NonHermitianU {
            u_i,
            end_offset: EndOffset::Auto,
        }
    }

    pub fn through_broken() -> Self {
        QuenchProtocol::ThroughBroken
    }

    /// Protocol I specified by the reduced distance `ε_i = v_i / v_c`.
    pub fn pt_symmetric_eps(eps_i: f64, u: f64) -> Self {
        QuenchProtocol::PtSymmetricV {
            v_i: eps_i * (1.0 + u),
            u,
            end_offset: EndOffset::Auto,
        }
    }

    /// Protocol II specified by `ε_i = u_i / u_c`.
    pub fn non_hermitian_eps(eps_i: f64) -> Self {
        Self::non_hermitian(eps_i)
    }

    pub fn with_end_offset(self, delta: EndOffset) -> Self {
        match self {
            QuenchProtocol::PtSymmetricV { v_i, u, .. } => QuenchProtocol::PtSymmetricV {
                v_i,
                u,
                end_offset: delta,
            },
            QuenchProtocol::NonHermitianU { u_i, .. } => QuenchProtocol::NonHermitianU {
                u_i,
                end_offset: delta,
            },
            QuenchProtocol::ThroughBroken => QuenchProtocol::ThroughBroken,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite();
        match *self {
            QuenchProtocol::PtSymmetricV { v_i, u, end_offset } => {
                let end_offset = end_offset.resolve(1.0);
                if !(ok(v_i) && ok(u) && ok(end_offset)) {
                    return Err(Error::InvalidProtocol("non-finite parameter"));
                }
                if v_i < 0.0 || u < 0.0 || end_offset < 0.0 {
                    return Err(Error::InvalidProtocol("v_i, u and end offset must be >= 0"));
                }
            }
            QuenchProtocol::NonHermitianU { u_i, end_offset } => {
                let end_offset = end_offset.resolve(1.0);
                if !(ok(u_i) && ok(end_offset)) {
                    return Err(Error::InvalidProtocol("non-finite parameter"));
                }
                if !(0.0..=1.0).contains(&u_i) || end_offset < 0.0 {
                    return Err(Error::InvalidProtocol("u_i must lie in [0, 1], end offset >= 0"));
                }
            }
            QuenchProtocol::ThroughBroken => {}
        }
        Ok(())
    }

    /// Stable short name used in file names and CSV columns.
    pub fn name(&self) -> &'static str {
        match self {
            QuenchProtocol::PtSymmetricV { .. } => "pt_symmetric",
            QuenchProtocol::NonHermitianU { .. } => "non_hermitian",
            QuenchProtocol::ThroughBroken => "through_broken",
        }
    }

    /// Critical value of the ramped parameter.
    pub fn critical_value(&self) -> f64 {
        match *self {
            QuenchProtocol::PtSymmetricV { u, .. } => 1.0 + u,
            QuenchProtocol::NonHermitianU { .. } => 1.0,
            QuenchProtocol::ThroughBroken => 1.0,
        }
    }

    /// Reduced initial distance from the critical point; zero for protocol III.
    pub fn eps_i(&self) -> f64 {
        match *self {
            QuenchProtocol::PtSymmetricV { v_i, .. } => v_i / self.critical_value(),
            QuenchProtocol::NonHermitianU { u_i, .. } => u_i / self.critical_value(),
            QuenchProtocol::ThroughBroken => 0.0,
        }
    }

    /// End offset in time units for a ramp of duration `τ_Q`.
    pub fn end_offset(&self, tau_q: f64) -> f64 {
        match *self {
            QuenchProtocol::PtSymmetricV { end_offset, .. }
            | QuenchProtocol::NonHermitianU { end_offset, .. } => end_offset.resolve(tau_q),
            QuenchProtocol::ThroughBroken => 0.0,
        }
    }

    pub fn start_time(&self, tau_q: f64) -> f64 {
        match self {
            QuenchProtocol::ThroughBroken => -tau_q,
            _ => 0.0,
        }
    }

    /// Nominal end of the ramp, `τ_Q` for every protocol.
    pub fn nominal_end(&self, tau_q: f64) -> f64 {
        tau_q
    }

    /// Time at which evolution stops: the nominal end minus the end offset.
    pub fn end_time(&self, tau_q: f64) -> f64 {
        tau_q - self.end_offset(tau_q)
    }

    /// Whether `n_ex(k) = n_ex(−k)` holds exactly. For `v = w`, `H(−k)` is a
    /// σz rotation of `H(k)`; for `u = 0`, σx conjugation maps one onto the
    /// other. Otherwise `H(−k) = H(k)ᵀ` only, which does not preserve
    /// excitation probabilities.
    pub fn k_even(&self) -> bool {
        match *self {
            QuenchProtocol::NonHermitianU { .. } => true,
            QuenchProtocol::PtSymmetricV { u, .. } => u == 0.0,
            QuenchProtocol::ThroughBroken => false,
        }
    }

    /// Momenta at which the ramp ends on an exceptional point. Protocol III
    /// ends deep in the PT-symmetric phase and has none.
    pub fn ep_momenta(&self) -> &'static [f64] {
        const ZONE_EDGE: [f64; 1] = [PI];
        const NH: [f64; 2] = [-2.0 * PI / 3.0, 2.0 * PI / 3.0];
        match self {
            QuenchProtocol::PtSymmetricV { .. } => &ZONE_EDGE,
            QuenchProtocol::NonHermitianU { .. } => &NH,
            QuenchProtocol::ThroughBroken => &[],
        }
    }

    /// Model parameters at time `t`.
    pub fn params_at(&self, t: f64, tau_q: f64) -> Result<SshParams> {
        if !(tau_q > 0.0 && tau_q.is_finite()) {
            return Err(Error::InvalidProtocol("tau_q must be positive"));
        }
        let lo = self.start_time(tau_q);
        let hi = self.nominal_end(tau_q);
        if !(t >= lo && t <= hi) {
            return Err(Error::TimeOutOfRange { t, lo, hi });
        }
        let (w, v, u) = self.ramp(t, tau_q);
        SshParams::new(w, v, u)
    }

    /// Unchecked `(w, v, u)` at time `t`.
    #[inline]
    pub(crate) fn ramp(&self, t: f64, tau_q: f64) -> (f64, f64, f64) {
        match *self {
            QuenchProtocol::PtSymmetricV { v_i, u, .. } => {
                (1.0, 1.0 + u + v_i * (1.0 - t / tau_q), u)
            }
            QuenchProtocol::NonHermitianU { u_i, .. } => (1.0, 1.0, 1.0 - u_i * (1.0 - t / tau_q)),
            QuenchProtocol::ThroughBroken => (1.0, 1.0 + t / tau_q, 0.5),
        }
    }

    /// The ramp as `(w, v, u)(t) = offset + slope·t`.
    pub(crate) fn linear_ramp(&self, tau_q: f64) -> ([f64; 3], [f64; 3]) {
        let r = tau_q.recip();
        match *self {
            QuenchProtocol::PtSymmetricV { v_i, u, .. } => {
                ([1.0, 1.0 + u + v_i, u], [0.0, -v_i * r, 0.0])
            }
            QuenchProtocol::NonHermitianU { u_i, .. } => {
                ([1.0, 1.0, 1.0 - u_i], [0.0, 0.0, u_i * r])
            }
            QuenchProtocol::ThroughBroken => ([1.0, 1.0, 0.5], [0.0, r, 0.0]),
        }
    }

    /// Smallest value of the squared band energy of mode `k` over the
    /// evolution window `[start, end]`. Negative means the mode is PT-broken
    /// at some time during the ramp.
    pub fn min_radicand_along_ramp(&self, k: f64, tau_q: f64) -> f64 {
        let t0 = self.start_time(tau_q);
        let t1 = self.end_time(tau_q);
        let at = |t: f64| {
            let (w, v, u) = self.ramp(t, tau_q);
            radicand(k, &SshParams { w, v, u })
        };
        let mut m = at(t0).min(at(t1));
        // Radicand is quadratic in v with vertex v* = −w cos k; monotone in u.
        if let QuenchProtocol::PtSymmetricV { .. } | QuenchProtocol::ThroughBroken = self {
            let (w, v0, _) = self.ramp(t0, tau_q);
            let (_, v1, _) = self.ramp(t1, tau_q);
            let v_star = -w * k.cos();
            if v_star > v0.min(v1) && v_star < v0.max(v1) {
                // invert the linear ramp for the time at which v = v*
                let t_star = t0 + (v_star - v0) / (v1 - v0) * (t1 - t0);
                m = m.min(at(t_star));
            }
        }
        m
    }
}

/// A record of a grid point moved off an exceptional momentum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nudge {
    pub index: usize,
    pub original: f64,
    pub nudged: f64,
}

/// `L` momenta `k_m = −π + 2π(m+1)/L`, possibly with some points nudged off
/// exceptional momenta.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumGrid {
    momenta: Vec<f64>,
    spacing: f64,
    nudges: Vec<Nudge>,
}

impl MomentumGrid {
    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nudges(&self) -> &[Nudge] {
        &self.nudges
    }

    /// Index of the grid point `−k_m`, if it is on the grid.
    pub fn mirror_index(&self, m: usize) -> Option<usize> {
        let l = self.len();
        // k_m + k_j = 0  ⇔  m + j + 2 = L (mod L)
        let j = (2 * l - m - 2) % l;
        let unmoved = |i: usize| !self.nudges.iter().any(|n| n.index == i);
        (unmoved(m) && unmoved(j)).then_some(j)
    }
}

/// Signed angular difference `a − b` wrapped into `(−π, π]`.
pub fn wrapped_difference(a: f64, b: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut d = (a - b) % two_pi;
    if d > PI {
        d -= two_pi;
    } else if d <= -PI {
        d += two_pi;
    }
    d
}

/// Uniform momentum grid of `len` points. Points within `exclusion_radius`
/// of one of `ep_momenta` move half a spacing away from it (outward when
/// exactly on it, inward if outward would leave the zone).
pub fn k_grid(len: usize, exclusion_radius: f64, ep_momenta: &[f64]) -> Result<MomentumGrid> {
    if len < 4 {
        return Err(Error::InvalidGrid("need at least 4 momenta"));
    }
    if !(exclusion_radius >= 0.0 && exclusion_radius.is_finite()) {
        return Err(Error::InvalidGrid("exclusion radius must be finite and >= 0"));
    }
    let spacing = 2.0 * PI / len as f64;
    let mut momenta: Vec<f64> = (0..len)
        .map(|m| -PI + spacing * (m + 1) as f64)
        .collect();
    // The last point is +π by construction; pin it against rounding.
    momenta[len - 1] = PI;
    let mut nudges = Vec::new();
    if exclusion_radius > 0.0 {
        for (index, k) in momenta.iter_mut().enumerate() {
            for &ep in ep_momenta {
                let d = wrapped_difference(*k, ep);
                if d.abs() <= exclusion_radius {
                    // rounding in the grid formula can leave an on-EP point a few ulps off
                    let mut dir = if d.abs() > 1e-12 { d.signum() } else { ep.signum() };
                    if dir == 0.0 {
                        dir = 1.0;
                    }
                    let mut moved = *k + dir * 0.5 * spacing;
                    if moved > PI || moved <= -PI {
                        moved = *k - dir * 0.5 * spacing;
                    }
                    nudges.push(Nudge {
                        index,
                        original: *k,
                        nudged: moved,
                    });
                    *k = moved;
                    break;
                }
            }
        }
    }
    Ok(MomentumGrid {
        momenta,
        spacing,
        nudges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-15;

    #[test]
    fn hamiltonian_examples() {
        let p = SshParams::new(1.0, 1.5, 0.5).unwrap();
        let h = hamiltonian(PI, &p);
        let expect = Mat2C::sigma_x().scale(C64::new(0.5, 0.0))
            + Mat2C::sigma_z().scale(C64::new(0.0, 0.5));
        assert!(h.distance(&expect) < 1e-15);
        let h0 = hamiltonian(0.0, &SshParams::new(1.0, 1.0, 0.0).unwrap());
        assert_eq!(h0, Mat2C::sigma_x().scale(C64::new(2.0, 0.0)));
        assert_eq!(h0, h0.adjoint());
    }

    #[test]
    fn pt_commutes() {
        let p = SshParams::new(1.0, 0.7, 0.9).unwrap();
        for i in 0..50 {
            let k = -PI + 0.13 * i as f64;
            let h = hamiltonian(k, &p);
            assert!(pt_conjugate(&h).distance(&h) < 1e-14);
        }
        // a generic matrix is not PT symmetric
        let g = Mat2C::sigma_y() + Mat2C::sigma_z();
        assert!(pt_conjugate(&g).distance(&g) > 0.1);
    }

    #[test]
    fn spectrum_examples() {
        let e = spectrum(2.0 * PI / 3.0, &SshParams::new(1.0, 1.0, 1.0).unwrap());
        assert!(e.norm() < 1e-7, "{e}");
        let e = spectrum(PI, &SshParams::new(1.0, 2.0, 0.5).unwrap());
        assert!((e - C64::new(3f64.sqrt() / 2.0, 0.0)).norm() < EPS);
        let e = spectrum(PI, &SshParams::new(1.0, 1.0, 0.5).unwrap());
        assert!((e - C64::new(0.0, 0.5)).norm() < EPS);
    }

    #[test]
    fn phases() {
        let p = |v, u| SshParams::new(1.0, v, u).unwrap();
        assert_eq!(phase_classify(&p(0.25, 0.5)), Phase::PtSymmetricTopological);
        assert_eq!(phase_classify(&p(2.0, 0.5)), Phase::PtSymmetricTrivial);
        assert_eq!(phase_classify(&p(1.0, 0.5)), Phase::PtBroken);
        assert_eq!(phase_classify(&p(1.5, 0.5)), Phase::PtBroken);
    }

    #[test]
    fn invalid_params() {
        assert!(SshParams::new(0.0, 1.0, 1.0).is_err());
        assert!(SshParams::new(1.0, -1.0, 1.0).is_err());
        assert!(SshParams::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn ramp_endpoints() {
        let tau = 7.0;
        let p1 = QuenchProtocol::pt_symmetric(0.5);
        assert_eq!(p1.params_at(0.0, tau).unwrap().v, 2.0);
        let p2 = QuenchProtocol::non_hermitian(0.5);
        assert_eq!(p2.params_at(tau, tau).unwrap().u, 1.0);
        let p3 = QuenchProtocol::through_broken();
        assert_eq!(p3.params_at(-tau, tau).unwrap().v, 0.0);
        assert_eq!(p3.params_at(tau, tau).unwrap().v, 2.0);
        assert!(matches!(
            p1.params_at(-0.1, tau),
            Err(Error::TimeOutOfRange { .. })
        ));
        assert!(matches!(
            p3.params_at(7.5, tau),
            Err(Error::TimeOutOfRange { .. })
        ));
        let end = p1.end_time(tau);
        let v_end = p1.params_at(end, tau).unwrap().v;
        assert!((v_end - (1.5 + 0.5 * p1.end_offset(tau) / tau)).abs() < 1e-15);
        assert_eq!(p1.end_offset(1e3), DEFAULT_END_OFFSET);
        // short ramps stop a fixed fraction before the end
        assert_eq!(p1.end_offset(1.0), DEFAULT_END_FRACTION);
        let fixed = p1.with_end_offset(EndOffset::Fixed(0.25));
        assert_eq!(fixed.end_time(tau), tau - 0.25);
    }

    #[test]
    fn rate_clock_scales_ramp_duration() {
        let p = QuenchProtocol::pt_symmetric_eps(0.2, 0.5);
        assert!((RampClock::Rate.ramp_time(&p, 50.0) - 10.0).abs() < 1e-12);
        assert_eq!(RampClock::Duration.ramp_time(&p, 50.0), 50.0);
        let p3 = QuenchProtocol::through_broken();
        assert_eq!(RampClock::Rate.ramp_time(&p3, 50.0), 50.0);
    }

    #[test]
    fn eps_conventions() {
        assert!((QuenchProtocol::pt_symmetric(0.5).eps_i() - 1.0 / 3.0).abs() < EPS);
        let p = QuenchProtocol::pt_symmetric_eps(0.2, 0.5);
        assert!((p.eps_i() - 0.2).abs() < EPS);
        assert_eq!(QuenchProtocol::non_hermitian_eps(0.3).eps_i(), 0.3);
    }

    #[test]
    fn broken_classification_along_ramps() {
        let tau = 10.0;
        // protocol I never enters the broken region
        let p1 = QuenchProtocol::pt_symmetric(0.5);
        let g = k_grid(256, 0.0, &[]).unwrap();
        assert!(g.momenta().iter().all(|&k| p1.min_radicand_along_ramp(k, tau) > 0.0));
        // protocol III breaks exactly for |sin k| < 1/2 with cos k < 0
        let p3 = QuenchProtocol::through_broken();
        for &k in g.momenta() {
            let broken = p3.min_radicand_along_ramp(k, tau) < 0.0;
            let expect = k.sin().abs() < 0.5 && k.cos() < 0.0;
            assert_eq!(broken, expect, "k = {k}");
        }
        let p2 = QuenchProtocol::non_hermitian(0.5);
        assert!(p2.min_radicand_along_ramp(PI, tau) < 0.0);
        assert!(p2.min_radicand_along_ramp(0.0, tau) > 0.0);
    }

    #[test]
    fn uniform_grid() {
        let g = k_grid(8, 0.0, &[PI]).unwrap();
        let expect: Vec<f64> = (1..=8).map(|m| -PI + PI / 4.0 * m as f64).collect();
        for (a, b) in g.momenta().iter().zip(&expect) {
            assert!((a - b).abs() < EPS);
        }
        assert_eq!(g.momenta()[7], PI);
        assert!(g.nudges().is_empty());
        let g = k_grid(1024, 0.0, &[]).unwrap();
        assert!((g.spacing() - 2.0 * PI / 1024.0).abs() < 1e-15);
        assert!(g.momenta().windows(2).all(|w| w[1] > w[0]));
        assert!(k_grid(3, 0.0, &[]).is_err());
    }

    #[test]
    fn nudged_grid() {
        let proto = QuenchProtocol::non_hermitian(0.5);
        let g = k_grid(6, 1e-6, proto.ep_momenta()).unwrap();
        assert_eq!(g.nudges().len(), 2);
        let m = g.momenta();
        assert!((m[0] + 5.0 * PI / 6.0).abs() < 1e-14);
        assert!((m[4] - 5.0 * PI / 6.0).abs() < 1e-14);
        assert!(m.windows(2).all(|w| w[1] > w[0]));
        // a point sitting on +π moves inward
        let g = k_grid(8, 1e-9, &[PI]).unwrap();
        assert!((g.momenta()[7] - (PI - PI / 8.0)).abs() < 1e-14);
    }

    #[test]
    fn mirror_indices() {
        let g = k_grid(8, 0.0, &[]).unwrap();
        for m in 0..8 {
            let j = g.mirror_index(m).unwrap();
            let s = g.momenta()[m] + g.momenta()[j];
            // ±π are the same point of the zone
            assert!(s.abs() < 1e-14 || (s.abs() - 2.0 * PI).abs() < 1e-14);
        }
    }

    #[test]
    fn wrapping() {
        assert!((wrapped_difference(-PI + 0.1, PI) - 0.1).abs() < 1e-12);
        assert!((wrapped_difference(PI - 0.1, PI) + 0.1).abs() < 1e-12);
        assert_eq!(wrapped_difference(1.0, 1.0), 0.0);
    }
}
