use thiserror::Error;

pub type Result<T> = std::result::Result<T, TodaError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TodaError {
    #[error("invalid rank {rank} for family {family}: {constraint}")]
    InvalidRank {
        family: char,
        rank: usize,
        constraint: &'static str,
    },
    #[error("unknown algebra token `{0}`")]
    UnknownAlgebra(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("wrong algebra: {0}")]
    WrongAlgebra(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("grid construction failed: {0}")]
    Grid(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}
