use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum ZenoError {
    #[error("matrix is not Hermitian: max |H - H^dag| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no eigenvalue cluster within {tol:e} of {omega0}")]
    NoCluster { omega0: f64, tol: f64 },

    #[error("ambiguous target: {count} eigenvalue clusters within {tol:e} of {omega0}")]
    AmbiguousCluster { omega0: f64, tol: f64, count: usize },

    #[error("eigenvalue tracking failed at s = {s}: {reason}")]
    Tracking { s: f64, reason: String },

    #[error("gap closes at s = {s} (gap {gap:e})")]
    GapClosed { s: f64, gap: f64 },

    #[error("quadrature did not converge (estimate {estimate}, error {error:e})")]
    Quadrature { estimate: f64, error: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("singular matrix: smallest singular value {sigma_min:e}")]
    Singular { sigma_min: f64 },

    #[error("rate is unbounded or not finite on [0, 1]")]
    UnboundedRate,

    #[error("step size underflow at s = {s}; increase step_tol or use an analytic-gap schedule")]
    StepUnderflow { s: f64 },

    #[error("filter annihilated the state (success probability {prob:e})")]
    FilterAnnihilated { prob: f64 },

    #[error("retry cap of {cap} exceeded")]
    RetryCap { cap: usize },

    #[error("window synthesis produced a negative coefficient w[{k}] = {value:e}")]
    NegativeCoefficient { k: i64, value: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("matrix market parse error at line {line}: {msg}")]
    MatrixMarket { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ZenoError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> ZenoError {
    ZenoError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
