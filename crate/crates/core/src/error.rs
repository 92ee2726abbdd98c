use thiserror::Error;

/// Errors raised by the numerical laboratory.
///
/// Numerical breakdown during a run (wave breaking, loss of resolution) is
/// reported through a run verdict, never through this type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("shape mismatch: expected {expected} samples, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("point {x} lies outside the domain [{lo}, {hi})")]
    Domain { x: f64, lo: f64, hi: f64 },
    #[error("block {j} is not resolvable on this grid (largest block is {j_max})")]
    Block { j: i32, j_max: i32 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("quadrature oracle refused: M = {m} exceeds the limit {limit}")]
    OracleTooLarge { m: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}
