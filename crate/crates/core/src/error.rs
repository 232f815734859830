use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular Poisson kernel: boundary point coincides with interior point (|x - xi| = {gap:e})")]
    SingularKernel { gap: f64 },

    #[error("not an orientation- and time-preserving isometry: {0}")]
    InvalidIsometry(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("group construction failed: {0}")]
    Construction(String),

    #[error("word ball would hold {count} elements, above the configured cap of {cap}")]
    EnumerationCap { count: usize, cap: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series near divergence: s = {s} is not above the critical exponent estimate {delta_hat}; choose s > delta_hat")]
    NearDivergence { s: f64, delta_hat: f64 },

    #[error("elements belong to different groups")]
    MixedGroups,

    #[error("quadrature under-resolved: degree {degree} < required {required}")]
    UnderResolved { degree: usize, required: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
