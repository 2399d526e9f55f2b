//! Invariant checks on random matrices, run by the `selfcheck` subcommand.

use biokz::{eigensystem, transition_probabilities, Mat2C, Vec2C, C64, DEFAULT_EP_THRESHOLD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Worst deviation observed for one invariant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfCheckReport {
    pub seed: u64,
    pub skipped_defective: usize,
    pub checks: Vec<CheckResult>,
}

impl SelfCheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn into_result(self) -> Result<Self> {
        match self.checks.iter().find(|c| !c.passed) {
            Some(c) => Err(CliError::Check(format!(
                "{}: deviation {:.3e} exceeds {:.1e}",
                c.name, c.max_deviation, c.tolerance
            ))),
            None => Ok(self),
        }
    }
}

fn complex(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Complex number with log-uniform magnitude in `[10^-3, 10^3]` and uniform phase.
fn gauge_factor(rng: &mut ChaCha8Rng) -> C64 {
    let mag = 10f64.powf(rng.gen_range(-3.0..=3.0));
    C64::from_polar(mag, rng.gen_range(0.0..std::f64::consts::TAU))
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    worst: f64,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Tracker {
            name,
            tolerance,
            cases: 0,
            worst: 0.0,
        }
    }

    fn record(&mut self, deviation: f64) {
        self.cases += 1;
        // NaN counts as a failure
        if !(deviation <= self.worst) {
            self.worst = if deviation.is_nan() { f64::INFINITY } else { deviation };
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            cases: self.cases,
            max_deviation: self.worst,
            tolerance: self.tolerance,
            passed: self.worst <= self.tolerance,
        }
    }
}

/// Draw `cases` random matrices and states and check the eigensystem and
/// probability invariants on each.
pub fn run(cases: usize, seed: u64) -> SelfCheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residual = Tracker::new("eigen_residual", 1e-10);
    let mut biortho = Tracker::new("biorthonormality", 1e-10);
    let mut complete = Tracker::new("completeness", 1e-10);
    let mut norm = Tracker::new("probability_sum", 1e-10);
    let mut gauge = Tracker::new("gauge_invariance", 1e-10);
    let mut scale = Tracker::new("state_scale_invariance", 1e-10);
    let mut hermitian = Tracker::new("hermitian_reduction", 1e-10);
    let mut skipped = 0;

    let mut done = 0;
    while done < cases {
        let h = Mat2C([[complex(&mut rng), complex(&mut rng)], [complex(&mut rng), complex(&mut rng)]]);
        let psi = Vec2C([complex(&mut rng), complex(&mut rng)]);
        let Ok(sys) = eigensystem(&h, DEFAULT_EP_THRESHOLD) else {
            skipped += 1;
            continue;
        };
        // keep the suite away from near-defective draws, where rounding alone
        // exceeds the tolerances
        if sys.defectiveness() > 0.9 {
            skipped += 1;
            continue;
        }
        let Ok(p) = transition_probabilities(&psi, &sys) else {
            skipped += 1;
            continue;
        };
        done += 1;
        let scale_h = h.norm().max(1.0);
        for pair in sys.pairs() {
            let r = h.mul_vec(&pair.right) - pair.right.scale(pair.eigenvalue);
            let l = h.adjoint().mul_vec(&pair.left) - pair.left.scale(pair.eigenvalue.conj());
            residual.record(r.norm() / (scale_h * pair.right.norm()));
            residual.record(l.norm() / (scale_h * pair.left.norm()));
        }
        let o = sys.cross_overlaps();
        biortho.record(
            (o[0][0] - 1.0)
                .norm()
                .max((o[1][1] - 1.0).norm())
                .max(o[0][1].norm())
                .max(o[1][0].norm()),
        );
        complete.record(sys.completeness().distance(&Mat2C::identity()));
        norm.record((p[0] + p[1] - 1.0).abs());

        let factors = [gauge_factor(&mut rng), gauge_factor(&mut rng)];
        let rescaled = sys.gauge_rescale(factors).expect("nonzero factors");
        let q = transition_probabilities(&psi, &rescaled).unwrap_or([f64::NAN; 2]);
        gauge.record((p[0] - q[0]).abs().max((p[1] - q[1]).abs()));

        let c = gauge_factor(&mut rng);
        let q = transition_probabilities(&psi.scale(c), &sys).unwrap_or([f64::NAN; 2]);
        scale.record((p[0] - q[0]).abs().max((p[1] - q[1]).abs()));

        // Hermitian part of the same draw, against |⟨u_n|ψ⟩|²/‖ψ‖²
        let hh = (h + h.adjoint()).scale(C64::new(0.5, 0.0));
        if let Ok(hs) = eigensystem(&hh, DEFAULT_EP_THRESHOLD) {
            if let Ok(ph) = transition_probabilities(&psi, &hs) {
                let dev = hs
                    .pairs()
                    .iter()
                    .zip(ph)
                    .map(|(pair, pn)| {
                        let u = pair.right.normalized().expect("eigenvector");
                        (pn - u.dot(&psi).norm_sqr() / psi.norm_sqr()).abs()
                    })
                    .fold(0.0, f64::max);
                hermitian.record(dev);
            }
        }
    }

    SelfCheckReport {
        seed,
        skipped_defective: skipped,
        checks: vec![
            residual.finish(),
            biortho.finish(),
            complete.finish(),
            norm.finish(),
            gauge.finish(),
            scale.finish(),
            hermitian.finish(),
        ],
    }
}
