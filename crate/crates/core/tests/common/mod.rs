#![allow(dead_code)]

use biokz::{oracle, Mat2C, QuenchProtocol, Vec2C, C64};
use proptest::prelude::*;

pub fn complex() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

pub fn matrix() -> impl Strategy<Value = Mat2C> {
    [complex(), complex(), complex(), complex()].prop_map(|[a, b, c, d]| Mat2C::new(a, b, c, d))
}

pub fn hermitian() -> impl Strategy<Value = Mat2C> {
    (-1.0f64..1.0, -1.0f64..1.0, complex()).prop_map(|(a, d, b)| {
        Mat2C::new(C64::new(a, 0.0), b, b.conj(), C64::new(d, 0.0))
    })
}

pub fn state() -> impl Strategy<Value = Vec2C> {
    (complex(), complex())
        .prop_filter("nonzero state", |(a, b)| a.norm() + b.norm() > 1e-3)
        .prop_map(|(a, b)| Vec2C::new(a, b))
}

/// Magnitude log-uniform in `[10^-3, 10^3]`, uniform phase.
pub fn gauge_factor() -> impl Strategy<Value = C64> {
    (-3.0f64..=3.0, 0.0f64..std::f64::consts::TAU).prop_map(|(e, phase)| C64::from_polar(10f64.powf(e), phase))
}

pub fn max_diff(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
}

/// Ground band by the eigenvalue rule alone: lower energy on a real
/// spectrum, otherwise the larger imaginary part.
pub fn ground_of(ev: [C64; 2]) -> usize {
    let real = ev[0].im.abs() < 1e-12 && ev[1].im.abs() < 1e-12;
    let first = if real { ev[0].re < ev[1].re } else { ev[0].im > ev[1].im };
    if first {
        0
    } else {
        1
    }
}

/// Excitation probability of mode `k` computed entirely by the oracle: raw
/// ground eigenvector at the start, a product of `slices` exact exponentials,
/// and probabilities from raw eigenvectors at the end.
pub fn oracle_excitation(k: f64, protocol: QuenchProtocol, tau_q: f64, slices: usize) -> f64 {
    let h_at = |t: f64| {
        let p = protocol.params_at(t, tau_q).unwrap();
        oracle::raw_hamiltonian(k, p.w, p.v, p.u)
    };
    let (ev0, right0, _) = oracle::raw_eigenvectors(&h_at(protocol.start_time(tau_q)));
    let psi0 = right0[ground_of(ev0)].normalized().unwrap();
    let psi = oracle::piecewise_exponential(k, protocol, tau_q, slices, psi0);
    let h1 = h_at(protocol.end_time(tau_q));
    let (ev1, _, _) = oracle::raw_eigenvectors(&h1);
    oracle::biorthogonal_probabilities(&psi, &h1)[1 - ground_of(ev1)]
}
