use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is not on the {space}: {reason}")]
    NotOnManifold { space: &'static str, reason: String },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("antipodal points: the geodesic between them is not unique")]
    Antipodal,

    #[error("tangent vector of norm {norm} exceeds the injectivity radius {limit}")]
    TangentTooLong { norm: f64, limit: f64 },

    #[error("operation `{op}` is not supported on the {space}")]
    Unsupported { op: &'static str, space: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("missing required input `{0}`")]
    MissingField(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("convex domain rejected: {0}")]
    InvalidDomain(String),

    #[error("sample budget m = {m} exceeds the limit of {limit}")]
    BudgetOverflow { m: f64, limit: u64 },

    #[error("partition mismatch: {n} samples cannot be split into {batches} batches of {batch_size}")]
    PartitionMismatch {
        n: usize,
        batches: usize,
        batch_size: usize,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
