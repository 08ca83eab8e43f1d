use thiserror::Error;

/// Crate-wide error type. Variants carry enough context to print a useful
/// one-line diagnostic; the CLI maps all of these to exit code 2 unless they
/// indicate budget exhaustion.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("duplicate vertex identifier {0:?}")]
    DuplicateVertex(String),

    #[error("edge endpoint {0:?} is not a declared vertex")]
    DanglingEndpoint(String),

    #[error("invalid identifier {0:?}: {1}")]
    InvalidIdentifier(String, String),

    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),

    #[error("graph is not connected")]
    Disconnected,

    #[error("invalid walk: {0}")]
    InvalidWalk(String),

    #[error("walks live on different graphs")]
    GraphMismatch,

    #[error("endpoint mismatch: {0}")]
    EndpointMismatch(String),

    #[error("cycle attachment mismatch: {0}")]
    AttachmentMismatch(String),

    #[error("presentation error: {0}")]
    Presentation(String),

    #[error("coset budget must be positive")]
    ZeroBudget,

    #[error("coset table is not closed")]
    OpenTable,

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error("lift blocked at truncation boundary near {0:?} (verified radius {1})")]
    TruncationBoundary(String, usize),

    #[error("no admissible lift: {0}")]
    LiftFailed(String),

    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
