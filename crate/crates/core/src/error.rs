use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid exponent {0}: must satisfy p >= 1")]
    InvalidExponent(f64),
    #[error("unsupported exponent {0} for this operation")]
    UnsupportedExponent(String),
    #[error("variable is not invertible: coordinate {index} is zero")]
    NotInvertible { index: usize },
    #[error("operation requires a real-valued variable")]
    ComplexNotAllowed,
    #[error("operation requires nonnegative values; coordinate {index} is negative")]
    NegativeValue { index: usize },
    #[error("variables are not monotone in a common direction")]
    NotMonotone,
    #[error("operator norm {0} is below 1")]
    OperatorNormBelowOne(f64),
    #[error("variables do not share a common descending order")]
    NotAligned,
    #[error("size {size} exceeds enumeration limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("state is not faithful: smallest eigenvalue {0}")]
    NotFaithful(f64),
    #[error("state is not tracial")]
    NotTracial,
    #[error("element is singular: smallest singular value {0} below floor")]
    Singular(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
