use thiserror::Error;

/// A parameter violated its declared invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be a finite positive number, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must be finite, got {value}")]
    NotFinite { name: &'static str, value: f64 },
    #[error("{0}")]
    Invalid(String),
}

impl ParamError {
    pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<(), ParamError> {
        if value.is_finite() && value > 0.0 {
            Ok(())
        } else {
            Err(ParamError::NotPositive { name, value })
        }
    }

    pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<(), ParamError> {
        if value.is_finite() {
            Ok(())
        } else {
            Err(ParamError::NotFinite { name, value })
        }
    }
}
