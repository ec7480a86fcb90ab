use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("rho must lie in (0, 1), got {0}")]
    RhoOutOfRange(f64),

    #[error("p0 must lie in (0, 1/2), got {0}")]
    P0OutOfRange(f64),

    #[error("mixing weight c must lie in (0, 1), got {0}")]
    MixOutOfRange(f64),

    #[error("pattern counts must both be at least 1, got r={r}, s={s}")]
    InvalidPattern { r: u32, s: u32 },

    #[error("lambda must be smaller than n (lambda={lambda}, n={n})")]
    LambdaTooLarge { lambda: f64, n: u32 },

    #[error("n must be a multiple of m={m} (got n={n})")]
    NotMultipleOfM { n: u32, m: u32 },

    #[error("invalid Monte Carlo configuration: {0}")]
    InvalidMcConfig(String),

    #[error("empty sample")]
    EmptySample,

    #[error("stationary distribution not found (residual {residual:e})")]
    StationaryFailed { residual: f64 },

    /// A computed object broke one of its structural guarantees
    /// (mass conservation, stochasticity, parity).
    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
