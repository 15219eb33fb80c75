use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParam { key: String, reason: String },

    #[error("mass matrix is not positive definite at t = {t}")]
    SingularMass { t: f64 },

    #[error("simulation blew up at t = {t} ({what})")]
    BlowUp { t: f64, what: String },

    #[error("no sign change of the leading exponent in bracket [{lo}, {hi}] N·mm/deg (re = {re_lo:.3e}, {re_hi:.3e})")]
    NoSignChange { lo: f64, hi: f64, re_lo: f64, re_hi: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("target radius {requested} m is outside the achievable range [{min}, {max}] m")]
    OutOfRange { requested: f64, min: f64, max: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParam { key: key.to_string(), reason: reason.into() }
}
