//! Two-component complex vectors and 2×2 complex matrices.
//!
//! Inner products follow the physics convention: `a.dot(b)` is ⟨a|b⟩, which
//! conjugates the left operand.

use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Float;

/// Double-precision complex scalar.
pub type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Principal square root, branch cut along the negative real axis (the sign
/// of a zero imaginary part picks the side, as for `Complex::sqrt`).
///
/// Avoids the polar round trip of `Complex::sqrt`, which dominates the cost
/// of per-step eigenvalue checks in the propagator.
#[inline]
pub fn csqrt(z: C64) -> C64 {
    if z.re == 0.0 && z.im == 0.0 {
        return C64::new(0.0, z.im);
    }
    let r = (z.re * z.re + z.im * z.im).sqrt();
    if z.re >= 0.0 {
        let t = ((r + z.re) * 0.5).sqrt();
        C64::new(t, z.im / (2.0 * t))
    } else {
        let t = ((r - z.re) * 0.5).sqrt();
        C64::new(z.im.abs() / (2.0 * t), t.copysign(z.im))
    }
}

/// `|z|` without the overflow guard of `hypot`.
#[inline]
pub fn cabs(z: C64) -> f64 {
    z.norm_sqr().sqrt()
}

/// A two-component complex column vector (a ket).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Vec2C(pub [C64; 2]);

impl Vec2C {
    pub const fn new(a: C64, b: C64) -> Self {
        Vec2C([a, b])
    }

    pub const fn zero() -> Self {
        Vec2C([ZERO, ZERO])
    }

    /// Unit vector along basis index `i` (0 or 1).
    pub fn basis(i: usize) -> Self {
        let mut v = Self::zero();
        v.0[i] = ONE;
        v
    }

    /// ⟨self|other⟩.
    #[inline]
    pub fn dot(&self, other: &Vec2C) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    /// Euclidean norm. No rescaling against overflow: states handled here are
    /// kept near unit norm.
    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    #[inline]
    pub fn scale(&self, c: C64) -> Vec2C {
        Vec2C([self.0[0] * c, self.0[1] * c])
    }

    #[inline]
    pub fn scale_real(&self, c: f64) -> Vec2C {
        Vec2C([self.0[0] * c, self.0[1] * c])
    }

    /// Unit-norm copy, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Vec2C> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self.scale_real(n.recip()))
        } else {
            None
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Vec2C) -> f64 {
        cabs(self.0[0] - other.0[0]).max(cabs(self.0[1] - other.0[1]))
    }
}

impl Add for Vec2C {
    type Output = Vec2C;
    #[inline]
    fn add(self, rhs: Vec2C) -> Vec2C {
        Vec2C([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }
}

impl Sub for Vec2C {
    type Output = Vec2C;
    #[inline]
    fn sub(self, rhs: Vec2C) -> Vec2C {
        Vec2C([self.0[0] - rhs.0[0], self.0[1] - rhs.0[1]])
    }
}

impl Neg for Vec2C {
    type Output = Vec2C;
    fn neg(self) -> Vec2C {
        Vec2C([-self.0[0], -self.0[1]])
    }
}

impl Mul<C64> for Vec2C {
    type Output = Vec2C;
    #[inline]
    fn mul(self, rhs: C64) -> Vec2C {
        self.scale(rhs)
    }
}

/// A 2×2 complex matrix stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2C(pub [[C64; 2]; 2]);

impl Mat2C {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2C([[a, b], [c, d]])
    }

    pub const fn zero() -> Self {
        Mat2C([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        Mat2C([[ONE, ZERO], [ZERO, ONE]])
    }

    pub const fn sigma_x() -> Self {
        Mat2C([[ZERO, ONE], [ONE, ZERO]])
    }

    pub const fn sigma_y() -> Self {
        Mat2C([[ZERO, C64::new(0.0, -1.0)], [I, ZERO]])
    }

    pub const fn sigma_z() -> Self {
        Mat2C([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]])
    }

    /// `x·σx + y·σy + z·σz` for complex coefficients.
    pub fn from_pauli(x: C64, y: C64, z: C64) -> Self {
        Mat2C([[z, x - I * y], [x + I * y, -z]])
    }

    #[inline]
    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    #[inline]
    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat2C {
        let m = &self.0;
        Mat2C([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    /// Elementwise complex conjugate.
    pub fn conj(&self) -> Mat2C {
        let m = &self.0;
        Mat2C([[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]])
    }

    pub fn transpose(&self) -> Mat2C {
        let m = &self.0;
        Mat2C([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn inverse(&self) -> Option<Mat2C> {
        let det = self.det();
        if det.norm() == 0.0 {
            return None;
        }
        let m = &self.0;
        let inv = det.inv();
        Some(Mat2C([
            [m[1][1] * inv, -m[0][1] * inv],
            [-m[1][0] * inv, m[0][0] * inv],
        ]))
    }

    #[inline]
    pub fn mul_vec(&self, v: &Vec2C) -> Vec2C {
        let m = &self.0;
        Vec2C([
            m[0][0] * v.0[0] + m[0][1] * v.0[1],
            m[1][0] * v.0[0] + m[1][1] * v.0[1],
        ])
    }

    pub fn scale(&self, c: C64) -> Mat2C {
        let m = &self.0;
        Mat2C([[m[0][0] * c, m[0][1] * c], [m[1][0] * c, m[1][1] * c]])
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec2C {
        Vec2C([self.0[0][j], self.0[1][j]])
    }

    /// Row `i`, conjugated, as a vector: the ket whose bra is that row.
    pub fn row_as_bra_ket(&self, i: usize) -> Vec2C {
        Vec2C([self.0[i][0].conj(), self.0[i][1].conj()])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// |A − B|_F.
    pub fn distance(&self, other: &Mat2C) -> f64 {
        (*self - *other).norm()
    }

    /// Outer product |a⟩⟨b|.
    pub fn outer(a: &Vec2C, b: &Vec2C) -> Mat2C {
        Mat2C([
            [a.0[0] * b.0[0].conj(), a.0[0] * b.0[1].conj()],
            [a.0[1] * b.0[0].conj(), a.0[1] * b.0[1].conj()],
        ])
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, rhs: Mat2C) -> Mat2C {
        let (a, b) = (&self.0, &rhs.0);
        Mat2C([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, rhs: Mat2C) -> Mat2C {
        let (a, b) = (&self.0, &rhs.0);
        Mat2C([
            [a[0][0] - b[0][0], a[0][1] - b[0][1]],
            [a[1][0] - b[1][0], a[1][1] - b[1][1]],
        ])
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    fn mul(self, rhs: Mat2C) -> Mat2C {
        let (a, b) = (&self.0, &rhs.0);
        Mat2C([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Mul<Vec2C> for Mat2C {
    type Output = Vec2C;
    fn mul(self, rhs: Vec2C) -> Vec2C {
        self.mul_vec(&rhs)
    }
}
