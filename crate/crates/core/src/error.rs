use thiserror::Error;

/// Errors raised by the pricing library.
///
/// `Validation` and `Domain` flag bad inputs; the remaining variants flag a
/// numerical failure of some kernel.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("argument outside the model domain: {0}")]
    Domain(String),

    #[error("value out of representable range: {0}")]
    Range(String),

    #[error("accuracy check failed: {0}")]
    Accuracy(String),

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:e}")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("root finding failed: {0}")]
    Root(String),

    #[error("drift is not admissible: {0}")]
    Admissibility(String),

    #[error("removable singularity: {0}")]
    Singular(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("data error: {0}")]
    Data(String),
}

impl Error {
    /// True for errors caused by the caller's inputs rather than by numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Domain(_) | Error::Data(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
