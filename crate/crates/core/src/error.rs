use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// `m = 0` and `ξ = 0`: the half-wave symbols are singular there.
    #[error("degenerate frequency: bracket vanishes at xi = {xi:?} with m = 0")]
    DegenerateFrequency { xi: [f64; 3] },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("aliasing guard: 2^(k_max+1) = {needed} must stay below the band limit {limit}")]
    Aliasing { needed: f64, limit: f64 },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("zero mode: {0}")]
    ZeroMode(String),

    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("non-finite state at t = {t}: {what}")]
    NonFinite { t: f64, what: String },

    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    #[error("field format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
