use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum Error {
    #[error("matrix is defective (defectiveness {defectiveness:.3e}); eigenvectors coalesce")]
    DefectiveMatrix { defectiveness: f64 },
    #[error("matrix or vector has non-finite entries")]
    NonFinite,
    #[error("gauge factor must be finite and nonzero")]
    ZeroGaugeFactor,
    #[error("state vector is zero")]
    ZeroState,
    #[error("associated-state overlap vanishes; probabilities undefined")]
    DegenerateDenominator,
    #[error("probability has imaginary residual {residual:.3e}")]
    ComplexProbability { residual: f64 },
    #[error("ground state ambiguous: eigenvalues coincide without an exceptional point")]
    DegenerateChoice,
    #[error("invalid model parameters: {0}")]
    InvalidParams(&'static str),
    #[error("invalid quench protocol: {0}")]
    InvalidProtocol(&'static str),
    #[error("time {t} outside protocol interval [{lo}, {hi}]")]
    TimeOutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("invalid momentum grid: {0}")]
    InvalidGrid(&'static str),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("step size underflow at t = {t} (defectiveness {defectiveness:.3e})")]
    StepUnderflow { t: f64, defectiveness: f64 },
    #[error("mode list does not match the momentum grid")]
    GridMismatch,
    #[error("need at least {required} points, found {found}")]
    InsufficientPoints { found: usize, required: usize },
    #[error("log-log fit requires strictly positive data")]
    NonPositiveData,
    #[error("no plateau window satisfies the slope criterion")]
    NoPlateauDetected,
    #[error("power law with exponent {exponent} never meets the plateau")]
    NoIntersection { exponent: f64 },
    #[error("rescaled curves have no common support")]
    NoOverlap,
}

impl Error {
    /// Short stable identifier, used in status columns.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DefectiveMatrix { .. } => "DefectiveMatrix",
            Error::NonFinite => "NonFinite",
            Error::ZeroGaugeFactor => "ZeroGaugeFactor",
            Error::ZeroState => "ZeroState",
            Error::DegenerateDenominator => "DegenerateDenominator",
            Error::ComplexProbability { .. } => "ComplexProbability",
            Error::DegenerateChoice => "DegenerateChoice",
            Error::InvalidParams(_) => "InvalidParams",
            Error::InvalidProtocol(_) => "InvalidProtocol",
            Error::TimeOutOfRange { .. } => "TimeOutOfRange",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::StepUnderflow { .. } => "StepUnderflow",
            Error::GridMismatch => "GridMismatch",
            Error::InsufficientPoints { .. } => "InsufficientPoints",
            Error::NonPositiveData => "NonPositiveData",
            Error::NoPlateauDetected => "NoPlateauDetected",
            Error::NoIntersection { .. } => "NoIntersection",
            Error::NoOverlap => "NoOverlap",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
