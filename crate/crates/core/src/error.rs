use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value for `{0}`")]
    NonFinite(&'static str),

    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian positive definite (Cholesky failed)")]
    NotPositiveDefinite,

    #[error("Gram matrix of the CSI is singular; zero-forcing is undefined")]
    SingularGram,

    #[error("predictor history holds {got} observations, order {order} needs {}", order + 1)]
    HistoryLength { order: usize, got: usize },

    #[error("need more antennas: {0}")]
    TooFewAntennas(String),

    #[error("malformed fading profile at line {line}: {reason}")]
    ProfileFormat { line: usize, reason: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_finite(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(name))
    }
}

pub(crate) fn ensure_positive(name: &'static str, x: f64) -> Result<()> {
    ensure_finite(name, x)?;
    if x > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be > 0, got {x}")))
    }
}
