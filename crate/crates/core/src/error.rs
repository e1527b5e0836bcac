use thiserror::Error;

/// Errors raised by the link-assessment library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error(
        "thermal sum truncated at n_max = {n_max} leaves tail {achieved:e} above tolerance {tol:e}"
    )]
    Truncation {
        n_max: usize,
        achieved: f64,
        tol: f64,
    },

    #[error("unsupported pairing: {noise} noise with {detector} detector (supported: thermal+PNRD, poisson+SPAD)")]
    UnsupportedPairing {
        noise: &'static str,
        detector: &'static str,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    domain: &'static str,
) -> Result<f64> {
    if value.is_nan() || value < lo || value > hi {
        Err(Error::Domain {
            name,
            value,
            domain,
        })
    } else {
        Ok(value)
    }
}

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<f64> {
    check_range(name, value, 0.0, 1.0, "[0, 1]")
}

pub(crate) fn check_nonneg(name: &'static str, value: f64) -> Result<f64> {
    check_range(name, value, 0.0, f64::INFINITY, "[0, inf)")
}
