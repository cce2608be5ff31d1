use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its domain. `key` names the offending field,
    /// e.g. `atom.beta` once it has been scoped by a config section.
    #[error("invalid value for `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    /// The requested correlation or statistic does not exist for the input
    /// (zero steady-state intensity, empty streams, ...).
    #[error("undefined: {0}")]
    Undefined(String),

    /// The integrator could not meet its tolerance or an invariant of the
    /// evolution was violated.
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// A request reaches past the data it is computed from.
    #[error("out of range: {0}")]
    OutOfRange(String),
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// Prefix the key of an [`Error::InvalidParameter`] with a config section.
    pub fn in_section(self, section: &str) -> Self {
        match self {
            Error::InvalidParameter { key, reason } => Error::InvalidParameter {
                key: format!("{section}.{key}"),
                reason,
            },
            other => other,
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Undefined(_) | Error::NumericFailure(_))
    }
}

pub(crate) fn require_finite(key: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(key, format!("must be finite, got {value}")))
    }
}

pub(crate) fn require_positive(key: &str, value: f64) -> Result<()> {
    require_finite(key, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(key, format!("must be > 0, got {value}")))
    }
}

pub(crate) fn require_nonnegative(key: &str, value: f64) -> Result<()> {
    require_finite(key, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(key, format!("must be >= 0, got {value}")))
    }
}
