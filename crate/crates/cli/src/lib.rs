//! Sweeps, file formats and the command line around the `biokz` numerics crate.
//!
//! * [`config`]: the line-oriented experiment file and its hash,
//! * [`sweep`]: parallel `(instance, τ_Q, k)` evaluation with ordered reduction,
//! * [`format`]: CSV layouts,
//! * [`analysis`]: fit, collapse and freezing reports,
//! * [`selfcheck`]: random-matrix invariant suite,
//! * [`cli`]: subcommand dispatch.

// `!(a < b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod format;
pub mod selfcheck;
pub mod sweep;

pub use config::{ExperimentConfig, MethodSelection, ProtocolKind, ProtocolSpec};
pub use error::{CliError, Result};
pub use sweep::{run_sweep, write_sweep, SweepOutput, SweepRecord};
