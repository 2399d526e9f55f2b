//! Brute-force reference routines, independent of the production code paths.
//!
//! Nothing here shares code with [`crate::biortho`] or [`crate::propagator`]:
//! eigenvectors come from a different closed form, probabilities are
//! assembled from unnormalized vectors with every normalization factor
//! written out, and time evolution is a product of exact 2×2 exponentials.

use num_traits::Float;

use crate::linalg::{Mat2C, Vec2C, C64};
use crate::model::QuenchProtocol;

/// `exp(A)` for a 2×2 matrix via `A = tI + B`, `B² = −det(B)·I`.
pub fn expm(a: &Mat2C) -> Mat2C {
    let t = a.trace() * 0.5;
    let b = *a - Mat2C::identity().scale(t);
    let s2 = -b.det();
    let s = s2.sqrt();
    let (cosh, sinhc) = if s.norm() < 1e-4 {
        // series: cosh s = 1 + s²/2 + s⁴/24, sinh s / s = 1 + s²/6 + s⁴/120
        (
            C64::new(1.0, 0.0) + s2 * 0.5 + s2 * s2 / 24.0,
            C64::new(1.0, 0.0) + s2 / 6.0 + s2 * s2 / 120.0,
        )
    } else {
        (s.cosh(), s.sinh() / s)
    };
    (Mat2C::identity().scale(cosh) + b.scale(sinhc)).scale(t.exp())
}

/// Propagator `exp(−i H T)` for constant `H`.
pub fn constant_propagator(h: &Mat2C, time: f64) -> Mat2C {
    expm(&h.scale(C64::new(0.0, -time)))
}

/// Evolve `psi0` through the protocol as a product of `slices` exact
/// exponentials of `H` frozen at each slice midpoint. The state is rescaled
/// to unit norm after every slice.
pub fn piecewise_exponential(
    k: f64,
    protocol: QuenchProtocol,
    tau_q: f64,
    slices: usize,
    psi0: Vec2C,
) -> Vec2C {
    let t0 = protocol.start_time(tau_q);
    let t1 = protocol.end_time(tau_q);
    let dt = (t1 - t0) / slices as f64;
    let mut psi = psi0;
    for i in 0..slices {
        let tm = t0 + (i as f64 + 0.5) * dt;
        let p = protocol.params_at(tm, tau_q).expect("midpoint inside ramp");
        let h = raw_hamiltonian(k, p.w, p.v, p.u);
        psi = constant_propagator(&h, dt).mul_vec(&psi);
        let n = psi.norm();
        psi = psi.scale_real(1.0 / n);
    }
    psi
}

/// Bloch Hamiltonian written out entry by entry.
pub fn raw_hamiltonian(k: f64, w: f64, v: f64, u: f64) -> Mat2C {
    let dx = v + w * k.cos();
    let dy = w * k.sin();
    Mat2C::new(
        C64::new(0.0, u),
        C64::new(dx, -dy),
        C64::new(dx, dy),
        C64::new(0.0, -u),
    )
}

/// Eigenvalues `t ± √(t² − det)` and unnormalized right and left eigenvectors.
///
/// Right: `(b, E − a)` or `(E − d, c)`, whichever is larger. Left (kets of
/// `H†` with eigenvalue `E*`): `(c*, E* − a*)` or `(E* − d*, b*)`.
pub fn raw_eigenvectors(h: &Mat2C) -> ([C64; 2], [Vec2C; 2], [Vec2C; 2]) {
    let [[a, b], [c, d]] = h.0;
    let t = (a + d) * 0.5;
    let root = (t * t - h.det()).sqrt();
    let ev = [t + root, t - root];
    let mut right = [Vec2C::zero(); 2];
    let mut left = [Vec2C::zero(); 2];
    for n in 0..2 {
        let e = ev[n];
        let r1 = Vec2C::new(b, e - a);
        let r2 = Vec2C::new(e - d, c);
        right[n] = if r1.norm() >= r2.norm() { r1 } else { r2 };
        let ec = e.conj();
        let l1 = Vec2C::new(c.conj(), ec - a.conj());
        let l2 = Vec2C::new(ec - d.conj(), b.conj());
        left[n] = if l1.norm() >= l2.norm() { l1 } else { l2 };
    }
    (ev, right, left)
}

/// Gauge-fixed biorthogonal probabilities assembled from raw eigenvectors.
pub fn biorthogonal_probabilities(psi: &Vec2C, h: &Mat2C) -> [f64; 2] {
    let (_, right, left) = raw_eigenvectors(h);
    // s_n = ⟨ũ_n|u_n⟩ for the raw pair
    let s = [left[0].dot(&right[0]), left[1].dot(&right[1])];
    // biorthonormal left kets L_n = ũ_n / s_n*
    let l = [
        left[0].scale(s[0].conj().inv()),
        left[1].scale(s[1].conj().inv()),
    ];
    // expansion ψ = Σ c_n u_n with c_n = ⟨L_n|ψ⟩
    let coeff = [l[0].dot(psi), l[1].dot(psi)];
    let assoc = l[0].scale(coeff[0] / l[0].dot(&l[0])) + l[1].scale(coeff[1] / l[1].dot(&l[1]));
    let denom = assoc.dot(psi);
    let mut out = [0.0; 2];
    for n in 0..2 {
        let num = assoc.dot(&right[n]) * l[n].dot(psi);
        out[n] = (num / (denom * l[n].dot(&right[n]))).re;
    }
    out
}

/// The same probabilities from the reduced form
/// `p_n = |⟨ũ_n|ψ⟩|²/‖ũ_n‖² / Σ_m |⟨ũ_m|ψ⟩|²/‖ũ_m‖²`, valid for any scaling of ũ.
pub fn left_overlap_probabilities(psi: &Vec2C, h: &Mat2C) -> [f64; 2] {
    let (_, _, left) = raw_eigenvectors(h);
    let w = [
        left[0].dot(psi).norm_sqr() / left[0].norm_sqr(),
        left[1].dot(psi).norm_sqr() / left[1].norm_sqr(),
    ];
    [w[0] / (w[0] + w[1]), w[1] / (w[0] + w[1])]
}

/// Explicit-normalization probabilities from raw right eigenvectors.
pub fn normalized_probabilities(psi: &Vec2C, h: &Mat2C) -> [f64; 2] {
    let (_, right, _) = raw_eigenvectors(h);
    let pn = psi.norm_sqr();
    let w = [
        right[0].dot(psi).norm_sqr() / (right[0].norm_sqr() * pn),
        right[1].dot(psi).norm_sqr() / (right[1].norm_sqr() * pn),
    ];
    [w[0] / (w[0] + w[1]), w[1] / (w[0] + w[1])]
}
