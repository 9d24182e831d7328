use thiserror::Error;

/// Errors raised by the numerical core and the relevance machinery.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is rank deficient (column {column} collinear with the others)")]
    RankDeficient { column: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("eigen solver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("probability {0} outside the open interval (0, 1)")]
    InvalidProbability(f64),

    #[error("covariance matrix is not positive semi-definite")]
    NotPositiveSemiDefinite,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("refit without the omitted variables failed: {0}")]
    RefitFailed(String),

    #[error("variable {0} has zero relevance; partial correlation undefined")]
    ZeroRelevanceVariable(usize),

    #[error("all off-diagonal similarities are zero")]
    DegenerateSimilarity,

    #[error("failed to spawn external predictor: {0}")]
    SpawnFailed(String),

    #[error("external predictor protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("external predictor timed out after {0} s")]
    Timeout(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
