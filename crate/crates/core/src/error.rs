use alloc::string::String;

/// Errors raised by the numerical routines, samplers and model code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{name} is outside its domain (got {value})")]
    Domain { name: &'static str, value: f64 },

    #[error("1F1({a}; {b}; {z}) could not be evaluated")]
    Evaluation { a: f64, b: f64, z: f64 },

    #[error("log-density is not concave near x = {x}")]
    Concavity { x: f64 },

    #[error("cannot build a rejection envelope: {0}")]
    ArsInit(&'static str),

    #[error("mean does not exist for a component with shape {shape} <= 1/2")]
    MomentNonexistence { shape: f64 },

    #[error("inconsistent model state: {0}")]
    Structure(String),

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64) -> Error {
    Error::Domain { name, value }
}

/// Checks `value > 0` and finite.
pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(domain(name, value))
    }
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain(name, value))
    }
}
