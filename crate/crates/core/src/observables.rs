//! Momentum-resolved and total excitation densities.

use alloc::vec::Vec;

use crate::biortho::{self, BiorthoEigensystem};
use crate::error::{Error, Result};
use crate::model::{MomentumGrid, QuenchProtocol};
use crate::propagator::{self, EvolvedState, IntegratorConfig, ModeDrive};

/// Slack above one tolerated in excitation probabilities.
pub const DENSITY_SLACK: f64 = 1e-8;

/// Which probability definition to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Gauge-fixed biorthogonal transition probability.
    Biorthogonal,
    /// Explicit normalization of overlaps with right eigenvectors.
    Normalized,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Biorthogonal => "biorthogonal",
            Method::Normalized => "normalized",
        }
    }

    pub fn probabilities(
        &self,
        psi: &crate::linalg::Vec2C,
        sys: &BiorthoEigensystem,
    ) -> Result<[f64; 2]> {
        match self {
            Method::Biorthogonal => biortho::transition_probabilities(psi, sys),
            Method::Normalized => biortho::normalized_method_probabilities(psi, sys),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeExcitation {
    pub k: f64,
    pub n_ex_k: f64,
    pub method: Method,
}

/// Excitation density of one sweep point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityResult {
    pub protocol: QuenchProtocol,
    pub tau_q: f64,
    pub eps_i: f64,
    pub len: usize,
    pub method: Method,
    pub n_ex: f64,
    /// Fraction of `n_ex` carried by modes that are PT-broken at some time.
    pub broken_mode_share: f64,
}

/// Probability of the excited band of `final_sys` for the evolved state.
///
/// The ground band is picked by [`propagator::ground_index`] on the final
/// spectrum; the excitation is the probability of the other band.
pub fn mode_excitation(
    k: f64,
    final_state: &EvolvedState,
    final_sys: &BiorthoEigensystem,
    method: Method,
) -> Result<ModeExcitation> {
    let g = propagator::ground_index(final_sys.eigenvalues())?;
    let p = method.probabilities(&final_state.psi, final_sys)?;
    Ok(ModeExcitation {
        k,
        n_ex_k: p[1 - g],
        method,
    })
}

/// Evolve mode `k` and evaluate its excitation under each requested method.
pub fn evolve_mode(
    k: f64,
    protocol: QuenchProtocol,
    tau_q: f64,
    cfg: &IntegratorConfig,
    methods: &[Method],
) -> Result<Vec<ModeExcitation>> {
    let (state, _) = propagator::evolve(k, protocol, tau_q, cfg, None)?;
    let drive = ModeDrive::new(k, protocol, tau_q)?;
    let sys = biortho::eigensystem(&drive.hamiltonian(state.t), cfg.ep_threshold)?;
    methods
        .iter()
        .map(|&m| mode_excitation(k, &state, &sys, m))
        .collect()
}

/// `n_ex = (1/L) Σ_k n_ex(k)` summed in ascending-k order.
///
/// `modes` must list exactly the grid momenta, in grid order, for one method.
pub fn density(
    modes: &[ModeExcitation],
    grid: &MomentumGrid,
    protocol: QuenchProtocol,
    tau_q: f64,
) -> Result<DensityResult> {
    if modes.len() != grid.len() || modes.is_empty() {
        return Err(Error::GridMismatch);
    }
    let method = modes[0].method;
    let mut total = 0.0;
    let mut broken = 0.0;
    for (mode, &k) in modes.iter().zip(grid.momenta()) {
        if mode.k != k || mode.method != method {
            return Err(Error::GridMismatch);
        }
        total += mode.n_ex_k;
        if protocol.min_radicand_along_ramp(k, tau_q) < 0.0 {
            broken += mode.n_ex_k;
        }
    }
    let len = grid.len();
    let share = if total > 0.0 {
        (broken / total).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(DensityResult {
        protocol,
        tau_q,
        eps_i: protocol.eps_i(),
        len,
        method,
        n_ex: total / len as f64,
        broken_mode_share: share,
    })
}
