//! Closed-form biorthogonal eigensystems of 2×2 complex matrices and the
//! gauge-fixed transition probability built on them.
//!
//! Right eigenvectors `|u_n⟩` solve `H|u_n⟩ = E_n|u_n⟩`; left eigenvectors
//! `|ũ_n⟩` solve `H†|ũ_n⟩ = E_n*|ũ_n⟩`. After construction the pairs are
//! biorthonormal, `⟨ũ_m|u_n⟩ = δ_mn`. Right vectors are unit-normalized with
//! their largest component made real and positive; left vectors carry
//! whatever length biorthonormality requires. The division by `⟨ũ_n|ũ_n⟩`
//! that removes the rescaling ambiguity of the associated state is applied in
//! [`associated_state`], not baked into the stored vectors.

use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{cabs, csqrt, Mat2C, Vec2C, C64};

/// Default exceptional-point threshold: matrices whose phase rigidity drops
/// below this value are rejected as defective.
pub const DEFAULT_EP_THRESHOLD: f64 = 1e-8;

/// Largest tolerated imaginary part of a transition probability.
pub const PROBABILITY_IMAG_TOL: f64 = 1e-10;

/// One eigenvalue with its right and left eigenvectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiorthoPair {
    pub eigenvalue: C64,
    pub right: Vec2C,
    pub left: Vec2C,
}

/// Two biorthonormal eigenpairs in a fixed band order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiorthoEigensystem {
    pairs: [BiorthoPair; 2],
    defectiveness: f64,
}

impl BiorthoEigensystem {
    pub fn pairs(&self) -> &[BiorthoPair; 2] {
        &self.pairs
    }

    pub fn pair(&self, n: usize) -> &BiorthoPair {
        &self.pairs[n]
    }

    pub fn eigenvalues(&self) -> [C64; 2] {
        [self.pairs[0].eigenvalue, self.pairs[1].eigenvalue]
    }

    /// One minus the smallest phase rigidity, measured before biorthonormal
    /// rescaling. Zero for normal matrices, one at an exceptional point.
    pub fn defectiveness(&self) -> f64 {
        self.defectiveness
    }

    /// The same system with the two bands exchanged.
    pub fn swapped(&self) -> Self {
        BiorthoEigensystem {
            pairs: [self.pairs[1], self.pairs[0]],
            defectiveness: self.defectiveness,
        }
    }

    /// The system with bands reordered by `perm` (`perm[n]` is the old index of new band `n`).
    pub fn permuted(&self, perm: [usize; 2]) -> Self {
        BiorthoEigensystem {
            pairs: [self.pairs[perm[0]], self.pairs[perm[1]]],
            defectiveness: self.defectiveness,
        }
    }

    /// Matrix of overlaps `⟨ũ_m|u_n⟩`, indexed `[m][n]`.
    pub fn cross_overlaps(&self) -> [[C64; 2]; 2] {
        let p = &self.pairs;
        [
            [p[0].left.dot(&p[0].right), p[0].left.dot(&p[1].right)],
            [p[1].left.dot(&p[0].right), p[1].left.dot(&p[1].right)],
        ]
    }

    /// `Σ_n |u_n⟩⟨ũ_n|`, which equals the identity for a complete basis.
    pub fn completeness(&self) -> Mat2C {
        self.pairs
            .iter()
            .fold(Mat2C::zero(), |acc, p| acc + Mat2C::outer(&p.right, &p.left))
    }

    /// Rescale the basis as `|u_n⟩ → |u_n⟩/a_n`, `⟨ũ_n| → a_n⟨ũ_n|`.
    ///
    /// The bra of the left vector picks up `a_n`, so its ket picks up `a_n*`;
    /// this keeps `⟨ũ_n|u_n⟩ = 1` for complex factors.
    pub fn gauge_rescale(&self, factors: [C64; 2]) -> Result<Self> {
        let mut out = *self;
        for (pair, a) in out.pairs.iter_mut().zip(factors) {
            if !(a.re.is_finite() && a.im.is_finite()) || a.norm() == 0.0 {
                return Err(Error::ZeroGaugeFactor);
            }
            pair.right = pair.right.scale(a.inv());
            pair.left = pair.left.scale(a.conj());
        }
        Ok(out)
    }
}

struct RawEigen {
    values: [C64; 2],
    right: [Vec2C; 2],
    left: [Vec2C; 2],
    rigidity: [f64; 2],
}

/// Eigenvalues `tr/2 ± √(((a−d)/2)² + bc)` with the principal square root.
pub fn eigenvalues(h: &Mat2C) -> [C64; 2] {
    let m = &h.0;
    let mean = (m[0][0] + m[1][1]) * 0.5;
    let half = (m[0][0] - m[1][1]) * 0.5;
    let disc = csqrt(half * half + m[0][1] * m[1][0]);
    [mean + disc, mean - disc]
}

fn phase_fixed(v: Vec2C) -> Vec2C {
    let idx = if v.0[0].norm_sqr() >= v.0[1].norm_sqr() { 0 } else { 1 };
    let z = v.0[idx];
    let r = cabs(z);
    if r == 0.0 {
        return v;
    }
    v.scale(z.conj() / r)
}

fn larger(a: Vec2C, b: Vec2C) -> Vec2C {
    if a.norm_sqr() >= b.norm_sqr() {
        a
    } else {
        b
    }
}

fn raw_eigen(h: &Mat2C) -> RawEigen {
    let values = eigenvalues(h);
    let scale = h.norm();
    let floor = 1e-14 * scale;
    let mut right = [Vec2C::zero(); 2];
    let mut left = [Vec2C::zero(); 2];
    for n in 0..2 {
        let other = values[1 - n];
        // (H − E_m)(H − E_n) = 0, so the range of H − E_m is the E_n eigenspace.
        let shifted = *h - Mat2C::identity().scale(other);
        let r = larger(shifted.column(0), shifted.column(1));
        let l = larger(shifted.row_as_bra_ket(0), shifted.row_as_bra_ket(1));
        right[n] = if r.norm() > floor {
            phase_fixed(r.normalized().unwrap_or(Vec2C::basis(n)))
        } else {
            Vec2C::basis(n)
        };
        left[n] = if l.norm() > floor {
            l.normalized().unwrap_or(Vec2C::basis(n))
        } else {
            Vec2C::basis(n)
        };
    }
    let rigidity = [
        cabs(left[0].dot(&right[0])),
        cabs(left[1].dot(&right[1])),
    ];
    RawEigen {
        values,
        right,
        left,
        rigidity,
    }
}

/// One minus the phase rigidity of `h`; one at an exceptional point.
///
/// Uses the Schur form `[[λ₁, ν], [0, λ₂]]`, in which both bands have rigidity
/// `|λ₁ − λ₂| / √(|λ₁ − λ₂|² + |ν|²)` and `|ν|² = ‖H‖²_F − |λ₁|² − |λ₂|²`.
/// No eigenvectors are formed, so the propagator can afford it every step.
/// A multiple of the identity counts as non-defective.
pub fn defectiveness(h: &Mat2C) -> f64 {
    let m = h.0;
    let mean = (m[0][0] + m[1][1]) * 0.5;
    let half = (m[0][0] - m[1][1]) * 0.5;
    let disc = half * half + m[0][1] * m[1][0];
    let disc_abs = cabs(disc);
    let frob = h.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
    // |λ₁ − λ₂|² = 4|disc|, |λ₁|² + |λ₂|² = 2|mean|² + 2|disc|
    let gap_sqr = 4.0 * disc_abs;
    let nu_sqr = (frob - 2.0 * mean.norm_sqr() - 2.0 * disc_abs).max(0.0);
    let total = gap_sqr + nu_sqr;
    if total <= 1e-28 * frob || total == 0.0 {
        return 0.0;
    }
    (1.0 - (gap_sqr / total).sqrt()).clamp(0.0, 1.0)
}

/// Biorthonormal eigensystem of `h`, bands ordered `[tr/2 + √Δ, tr/2 − √Δ]`.
///
/// Fails with [`Error::DefectiveMatrix`] when the defectiveness exceeds
/// `1 − ep_threshold`.
pub fn eigensystem(h: &Mat2C, ep_threshold: f64) -> Result<BiorthoEigensystem> {
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    if !(ep_threshold > 0.0 && ep_threshold < 1.0) {
        return Err(Error::InvalidParams("ep_threshold must lie in (0, 1)"));
    }
    let raw = raw_eigen(h);
    let defectiveness = (1.0 - raw.rigidity[0].min(raw.rigidity[1])).clamp(0.0, 1.0);
    if defectiveness > 1.0 - ep_threshold {
        return Err(Error::DefectiveMatrix { defectiveness });
    }
    let mk = |n: usize| {
        let s = raw.left[n].dot(&raw.right[n]);
        BiorthoPair {
            eigenvalue: raw.values[n],
            right: raw.right[n],
            left: raw.left[n].scale(s.conj().inv()),
        }
    };
    Ok(BiorthoEigensystem {
        pairs: [mk(0), mk(1)],
        defectiveness,
    })
}

/// Gauge-fixed associated state `|ψ̃⟩ = Σ_n c_n |ũ_n⟩/⟨ũ_n|ũ_n⟩`, `c_n = ⟨ũ_n|ψ⟩`.
pub fn associated_state(psi: &Vec2C, sys: &BiorthoEigensystem) -> Result<Vec2C> {
    check_state(psi)?;
    Ok(sys.pairs.iter().fold(Vec2C::zero(), |acc, p| {
        let c = p.left.dot(psi);
        acc + p.left.scale(c / p.left.norm_sqr())
    }))
}

fn check_state(psi: &Vec2C) -> Result<()> {
    if !psi.is_finite() {
        return Err(Error::NonFinite);
    }
    if psi.is_zero() {
        return Err(Error::ZeroState);
    }
    Ok(())
}

/// Transition probabilities from `ψ` into each band,
/// `p_n = ⟨ψ̃|u_n⟩⟨ũ_n|ψ⟩ / (⟨ψ̃|ψ⟩⟨ũ_n|u_n⟩)`.
///
/// Degree zero in `ψ` and invariant under [`BiorthoEigensystem::gauge_rescale`].
pub fn transition_probabilities(psi: &Vec2C, sys: &BiorthoEigensystem) -> Result<[f64; 2]> {
    let assoc = associated_state(psi, sys)?;
    let denom = assoc.dot(psi);
    if denom.norm() <= 1e-14 * assoc.norm() * psi.norm() {
        return Err(Error::DegenerateDenominator);
    }
    let mut out = [0.0; 2];
    for (slot, p) in out.iter_mut().zip(sys.pairs.iter()) {
        let value = assoc.dot(&p.right) * p.left.dot(psi) / (denom * p.left.dot(&p.right));
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if value.im.abs() > PROBABILITY_IMAG_TOL {
            return Err(Error::ComplexProbability {
                residual: value.im.abs(),
            });
        }
        *slot = value.re;
    }
    Ok(out)
}

/// Probabilities from unit-normalized overlaps with right eigenvectors,
/// `|⟨û_n|ψ̂⟩|²`, renormalized to sum to one.
///
/// This is a reconstruction of the explicit-normalization approach used for
/// comparison; it ignores the left eigenvectors entirely.
pub fn normalized_method_probabilities(
    psi: &Vec2C,
    sys: &BiorthoEigensystem,
) -> Result<[f64; 2]> {
    check_state(psi)?;
    let psi_hat = psi.normalized().ok_or(Error::ZeroState)?;
    let mut weights = [0.0; 2];
    for (w, p) in weights.iter_mut().zip(sys.pairs.iter()) {
        let u_hat = p.right.normalized().ok_or(Error::ZeroState)?;
        *w = u_hat.dot(&psi_hat).norm_sqr();
    }
    let total = weights[0] + weights[1];
    if !(total > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    Ok([weights[0] / total, weights[1] / total])
}
