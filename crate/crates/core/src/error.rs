use thiserror::Error;

use crate::program::ParseError;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {0}: every mode needs at least 2 levels")]
    InvalidDimension(usize),

    #[error("occupation {occupation} of mode {mode} lies outside truncation {dim}")]
    OutOfTruncation { mode: usize, occupation: usize, dim: usize },

    #[error("truncation too small: leaked weight {leakage:.3e} exceeds tolerance {tolerance:.1e}")]
    TruncationTooSmall { leakage: f64, tolerance: f64 },

    #[error("operation requires a density matrix; densify the pure state first")]
    NotDensity,

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("hamiltonian `{0}` is not Hermitian")]
    InvalidHamiltonian(String),

    #[error("integration step too large: dt * max(rate, |H|) = {0:.3} > 0.1")]
    StepTooLarge(f64),

    #[error("invalid time: {0}")]
    InvalidTime(String),

    #[error("drive resonant with qC and kappa_tilde = 0: amplitude undefined")]
    ResonantDriveUndefined,

    #[error("singular Stark-shift correction: delta + alpha = 0")]
    SingularCorrection,

    #[error("invalid device parameters: {0}")]
    InvalidParams(String),

    #[error("invalid detunings: coupling correction is singular")]
    InvalidDetunings,

    #[error("zero cavity-transmon detuning: inverse Purcell rate undefined")]
    ResonantUndefined,

    #[error("invalid coupling g = {0}: must be > 0")]
    InvalidCoupling(f64),

    #[error("post-selection discarded every run (survival = 0)")]
    AllDiscarded,

    #[error("fit failed after {iterations} iterations (residual {residual:.3e}, gradient {gradient:.3e})")]
    FitFailed { iterations: usize, residual: f64, gradient: f64 },

    #[error("degenerate data: {0}")]
    FitDegenerate(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("instruction {index} (line {line}) failed")]
    Execution {
        index: usize,
        line: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("empty sweep grid")]
    EmptyGrid,
}

impl Error {
    /// True for guards tripped by the numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::TruncationTooSmall { .. }
            | Error::StepTooLarge(_)
            | Error::FitFailed { .. }
            | Error::FitDegenerate(_)
            | Error::AllDiscarded => true,
            Error::Execution { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
