use thiserror::Error;

/// Errors raised by constructors, solvers and verifiers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty weight vector")]
    EmptyWeights,
    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("weights have zero total mass")]
    ZeroMass,
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("entry ({row}, {col}) = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("marginal mismatch: {which} {index} is {actual}, expected {expected}")]
    MarginalMismatch {
        which: &'static str,
        index: usize,
        actual: f64,
        expected: f64,
    },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("tensor is not symmetric at ({i}, {j}, {k}, {l})")]
    TensorNotSymmetric {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
    },
    #[error("loss domain violated: {0}")]
    LossDomain(String),
    #[error("instance too large: {what} is {size}, cap is {cap}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("instance is not certified concave; a global solution is not available")]
    NotConcave,
    #[error("instance is concave; no concavity witness exists")]
    NoWitness,
    #[error("solver did not converge after {0} iterations")]
    NotConverged(usize),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
