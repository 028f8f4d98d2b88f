use thiserror::Error;

/// Errors raised by the key-rate library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error(
        "sector j = {j} needs threshold coefficients up to n = {j}, only {available} available"
    )]
    InsufficientCoefficients { j: usize, available: usize },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },

    #[error("no closed-form relative entropy for sector j = {j}; use the numeric path")]
    UnsupportedSector { j: usize },

    #[error("infeasible {what} = {value}: attainable interval is [{lo}, {hi}]")]
    Infeasible {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("gain does not determine the transmissivity at tau = {tau} (lambda_0 = 1/2 or lambda_0 = lambda_1)")]
    Degenerate { tau: f64 },

    #[error("tail bound invalid at tau = {tau}: yield increases from j = {first_violation} to j = {}", first_violation + 1)]
    BoundInvalid { tau: f64, first_violation: usize },

    #[error("rate function returned a non-finite value {value} at tau = {tau}")]
    Evaluation { tau: f64, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected: "0 <= x <= 1",
        })
    }
}
