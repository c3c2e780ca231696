use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported dimension {0}; expected 1, 2 or 3")]
    UnsupportedDimension(usize),

    #[error("normal is not a unit vector (|nu| = {0})")]
    NonUnitNormal(f64),

    #[error("point {0:?} lies outside the mesh domain")]
    OutsideDomain(Vec<f64>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite energy {value} for competitor {competitor}")]
    NonFiniteEnergy { value: f64, competitor: String },

    #[error("sandwich violation: {0}")]
    SandwichViolation(String),

    #[error("identity violation: {0}")]
    IdentityViolation(String),

    #[error("unknown density `{0}`")]
    UnknownDensity(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
