use thiserror::Error;

/// Errors raised by tensor operations, solvers and the case library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("field error: {0}")]
    Field(String),
    #[error("invalid mode index {mode} for a tensor of order {order}")]
    Mode { mode: usize, order: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    Length { expected: usize, actual: usize },
    #[error("invalid notion: {0}")]
    Notion(String),
    #[error("infeasible problem: {0}")]
    Infeasible(String),
    #[error("unsupported by the grid oracle: {0}")]
    Unsupported(String),
    #[error("oracle did not certify within budget: bracket [{lo}, {hi}]")]
    NotCertified { lo: f64, hi: f64 },
    #[error("unknown case id `{0}`")]
    UnknownCase(String),
    #[error("structure check rejected input: {0}")]
    Structure(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
