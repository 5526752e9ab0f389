use thiserror::Error;

/// Errors raised by the rate and fidelity models.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{field} = {value} is outside [{min}, {max}]")]
    OutOfRange {
        field: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("{field} must be finite, got {value}")]
    NotFinite { field: &'static str, value: f64 },

    #[error("invalid parameter {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("missing parameter {field} for {context}")]
    MissingParameter {
        field: &'static str,
        context: &'static str,
    },

    #[error("window chain needs {states} states, limit is {limit}")]
    StateSpaceTooLarge { states: u128, limit: usize },

    #[error("{requested} channels requested but only {available} are available")]
    ChannelCapacityExceeded { requested: u32, available: u32 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numeric overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Rejects NaN and infinities.
pub(crate) fn finite(field: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NotFinite { field, value })
    }
}

pub(crate) fn in_range(field: &'static str, value: f64, min: f64, max: f64) -> Result<f64> {
    finite(field, value)?;
    if value < min || value > max {
        return Err(Error::OutOfRange {
            field,
            value,
            min,
            max,
        });
    }
    Ok(value)
}

pub(crate) fn positive(field: &'static str, value: f64) -> Result<f64> {
    finite(field, value)?;
    if value <= 0.0 {
        return Err(Error::InvalidParameter {
            field,
            reason: format!("must be > 0, got {value}"),
        });
    }
    Ok(value)
}
