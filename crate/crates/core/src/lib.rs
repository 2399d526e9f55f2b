//! Biorthogonal quench dynamics of the non-Hermitian SSH model.
//!
//! `biokz` is `no_std` (it needs `alloc` for trajectories and grids). It
//! provides
//!
//! * [`biortho`]: closed-form left/right eigensystems of 2×2 matrices, the
//!   gauge-fixed associated state and the transition probability built from it,
//! * [`model`]: the Bloch Hamiltonian, its spectrum and phases, momentum grids
//!   and the three quench protocols,
//! * [`propagator`]: adaptive Runge–Kutta integration of a single mode with
//!   overflow-safe rescaling,
//! * [`observables`]: momentum-resolved and total excitation densities,
//! * [`scaling`]: power-law fits, plateau detection and scaling collapse,
//! * [`oracle`]: slow brute-force reference routines used to test the above.
//!
//! File formats, parallel sweeps and the command line live in `biokz-cli`.

#![no_std]
// Once std is linked (tests, or a dependent enabling num-traits/std) its
// inherent float methods shadow `Float`, leaving the import unused.
#![allow(unused_imports)]
// `!(a < b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(test)]
extern crate std;

extern crate alloc;

pub mod biortho;
pub mod error;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod propagator;
pub mod scaling;

pub mod oracle;

pub use biortho::{
    associated_state, eigensystem, normalized_method_probabilities, transition_probabilities,
    BiorthoEigensystem, BiorthoPair, DEFAULT_EP_THRESHOLD,
};
pub use error::{Error, Result};
pub use linalg::{Mat2C, Vec2C, C64};
pub use model::{
    hamiltonian, k_grid, phase_classify, spectrum, EndOffset, MomentumGrid, Phase, QuenchProtocol,
    RampClock, SshParams,
};
pub use observables::{density, mode_excitation, DensityResult, Method, ModeExcitation};
pub use propagator::{
    evolve, initial_ground_state, time_resolved, track_bands, EvolvedState, IntegratorConfig,
    Trajectory, TrajectorySample,
};
pub use scaling::{
    collapse, critical_quench_time, extract_plateau, fit_power_law, CollapseReport, ModeCurve,
    PowerLawFit, SaturationReport,
};
