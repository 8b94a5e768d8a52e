use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Walk parameters violate a structural invariant.
    #[error("invalid walk parameters: {0}")]
    InvalidParams(String),
    /// Dense oracle refused because the matrix would be too large.
    #[error("dimension {dim} exceeds the dense oracle limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// Configuration inconsistent with exact integer arithmetic.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("wrong walk model: expected {expected}, got {got}")]
    WrongModel { expected: &'static str, got: &'static str },
    #[error("coupling map is disconnected")]
    DisconnectedCoupling,
    #[error("requested key length {requested} exceeds extractable budget {budget}")]
    BudgetExceeded { requested: usize, budget: usize },
    #[error("run {run} needs {needed} bits but only {available} are available")]
    Allocation { run: usize, needed: usize, available: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("malformed bit sequence at offset {0}")]
    MalformedBits(usize),
    #[error("empty input")]
    Empty,
}
