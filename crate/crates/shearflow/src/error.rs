use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("wavenumber k must be nonzero")]
    ZeroWavenumber,
    #[error("viscosity must lie in (0,1), got {0}")]
    ViscosityOutOfRange(f64),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("resolution {got} below minimum {min}")]
    ResolutionTooSmall { got: usize, min: usize },
    #[error("resolution {got} exceeds cap {cap}")]
    ResolutionCap { got: usize, cap: usize },
    #[error("grid mismatch: expected {expected} values, got {got}")]
    GridMismatch { expected: usize, got: usize },
    #[error("time step {dt} violates transport restriction |k| y_max dt <= 1/2 (limit {limit})")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("instability detected: norm grew from {before:e} to {after:e}")]
    Instability { before: f64, after: f64 },
    #[error("blow-up guard tripped at t={t}: energy {energy:e} exceeds {limit:e}")]
    BlowUp { t: f64, energy: f64, limit: f64 },
    #[error("iteration did not converge after {iterations} steps (last relative change {change:e})")]
    NoConvergence { iterations: usize, change: f64 },
    #[error("operator not supported on this domain: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("infeasible coefficients: {0}")]
    Infeasible(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
