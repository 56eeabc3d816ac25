use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by parsers and detectors.
///
/// Line and column coordinates are 1-based and refer to the input text.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: expected {expected} cells, found {found}")]
    Ragged {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}, column {column}: cannot parse {token:?} as a number")]
    BadNumber {
        line: usize,
        column: usize,
        token: String,
    },

    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },

    #[error("line {line}: unknown group label {token:?}")]
    UnknownLabel { line: usize, token: String },

    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: &'static str, id: String },

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("none of the {requested} signature features are present; probable platform mismatch")]
    PlatformMismatch { requested: usize },

    #[error("non-positive value {value} at feature {feature:?}, sample {sample:?} cannot be log-transformed")]
    NonPositive {
        feature: String,
        sample: String,
        value: f64,
    },

    #[error("feature {0:?} has zero variance")]
    ZeroVariance(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("missing value encountered in {0}")]
    MissingValue(String),

    #[error("invalid pipeline: {0}")]
    InvalidPipeline(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("power iteration did not converge after {iterations} iterations (relative residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("leading singular value is not separated (second/first eigenvalue ratio {ratio})")]
    AmbiguousDirection { ratio: f64 },

    #[error("only one class present")]
    SingleClass,

    #[error("no label for sample {0:?}")]
    MissingLabel(String),

    #[error("required input {0:?} is missing")]
    MissingKey(String),

    #[error("probability for {key:?} is {value}, outside [0, 1]")]
    OutOfRange { key: String, value: f64 },

    #[error("unknown finding code {0:?}")]
    UnknownCode(String),
}
