use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("receive window [{needed_start:.3e}, {needed_end:.3e}] s not covered by signal [{have_start:.3e}, {have_end:.3e}] s")]
    WindowCoverage {
        needed_start: f64,
        needed_end: f64,
        have_start: f64,
        have_end: f64,
    },

    #[error("unsupported constellation `{0}`")]
    UnsupportedConstellation(String),

    #[error("empty signal")]
    EmptySignal,

    #[error("operation requires a {expected} scattering function, got {found}")]
    WrongScattering {
        expected: &'static str,
        found: &'static str,
    },

    #[error("quadrature did not converge: relative change {change:.3e} after {levels} refinements")]
    QuadratureNonConvergence { change: f64, levels: usize },

    #[error("effective gain {0:.3e} below equalizer threshold")]
    GainUnderflow(f64),

    #[error("insufficient realizations: {reason}")]
    InsufficientRealizations { reason: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Checks that `value` is finite and strictly positive.
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {value}")))
    }
}
