use thiserror::Error;

/// Errors raised by the model, integrator and analysis layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument left the open interval on which the equations are defined.
    #[error("{quantity} = {value:e} is outside the open interval ({lower:e}, {upper:e})")]
    Domain {
        quantity: &'static str,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration step produced a non-finite state")]
    NonFinite,

    /// The current never rose above twice the discharge-end threshold.
    #[error("no discharge: current never exceeded {threshold:e} A")]
    NoDischarge { threshold: f64 },

    #[error("trajectory cannot be classified: {0}")]
    Unclassifiable(String),

    #[error("cubic discriminant does not change sign on x1 in [{lower:e}, {upper:e}]")]
    NoBifurcation { lower: f64, upper: f64 },

    #[error("no grid cell pair straddles the consumption level {eta}")]
    EmptyBoundary { eta: f64 },

    #[error("calibration stage '{stage}' misses its target by {relative_error:.3e} (relative)")]
    CalibrationMismatch {
        stage: &'static str,
        relative_error: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_open(quantity: &'static str, value: f64, lower: f64, upper: f64) -> Result<()> {
    if value > lower && value < upper {
        Ok(())
    } else {
        Err(Error::Domain {
            quantity,
            value,
            lower,
            upper,
        })
    }
}
