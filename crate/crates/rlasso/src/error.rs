use thiserror::Error;

/// Errors shared across the library.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported norm exponent q = {0}; only q in {{1, 2, inf}} is supported")]
    UnsupportedNorm(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("matrix is rank deficient (rank {rank} < {rows} rows)")]
    RankDeficient { rank: usize, rows: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("tuning parameter {lambda} is at or below the threshold {threshold}")]
    Threshold { lambda: f64, threshold: f64 },
    #[error("insufficient measurements: the tuning denominator is {0} <= 0")]
    InsufficientMeasurements(f64),
    #[error("problem is infeasible: {0}")]
    Infeasible(String),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex pivot budget of {0} iterations exhausted")]
    CycleLimit(usize),
    #[error("null space property of order {order} is violated; kernel witness available")]
    NspViolation { order: usize, witness: Vec<f64> },
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("bisection bracket not found in [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("recovery check inconclusive: solver hit the iteration limit")]
    Inconclusive,
    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
