use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(u32),
    #[error("simulation supports d in {{2, 3}}, got {0}")]
    UnsupportedDimension(u32),
    #[error("direction is undefined at the origin")]
    UndefinedDirection,
    #[error("angle coordinate {value} outside its domain [0, {limit})")]
    AngleOutOfDomain { value: f64, limit: f64 },
    #[error("intensity evaluated to a negative value ({0})")]
    InvalidIntensity(f64),
    #[error("value {0} is outside the range of the quantile transform")]
    QuantileOutOfRange(f64),
    #[error("frontier evaluation returned a non-finite value")]
    FrontierEvaluation,
    #[error("frontier bounds must satisfy 0 < m <= M, got m={m}, M={upper}")]
    InvalidFrontierBounds { m: f64, upper: f64 },
    #[error("unknown frontier tag `{0}`")]
    UnknownFrontier(String),
    #[error("partition needs k_n >= 1, got {0}")]
    InvalidPartition(usize),
    #[error("{empty} of {total} cells are empty; reduce k_n")]
    EmptyCells { empty: usize, total: usize },
    #[error("cell summary is degenerate: transformed extremes sum to zero")]
    DegenerateSummary,
    #[error("kernel weights degenerate at x = {0} (kappa_n = 0)")]
    DegenerateWeights(f64),
    #[error("confidence interval undefined: intensity vanishes at the estimate")]
    UndefinedInterval,
    #[error("gamma must lie strictly inside (0, 1), got {0}")]
    InvalidGamma(f64),
    #[error("quadrature budget exhausted before reaching the requested tolerance")]
    QuadratureBudget,
    #[error("replication {rep} exhausted {attempts} redraw attempts on empty cells")]
    RetryBudget { rep: usize, attempts: u32 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
