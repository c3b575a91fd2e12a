use thiserror::Error;

/// Errors raised by measures, constructions, solvers and parsers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown edge id {0}")]
    UnknownEdge(usize),
    #[error("unknown vertex id {0}")]
    UnknownVertex(usize),
    #[error("edge {edge} has zero length")]
    ZeroLengthEdge { edge: usize },
    #[error("lattice basis is singular")]
    SingularBasis,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("quotient graph is disconnected")]
    Disconnected,
    #[error("quotient graph is not regular")]
    NotRegular,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integer overflow in exact arithmetic")]
    Overflow,
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("all points are identical")]
    IdenticalPoints,
    #[error("shift enumeration too large: {0} raw assignments")]
    EnumerationTooLarge(u128),
    #[error("coefficients are not integral: {0}")]
    NonIntegral(String),
    #[error("unknown catalog entry `{0}`")]
    UnknownCatalogName(String),
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
