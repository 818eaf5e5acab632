//! Error type shared by every module.

use thiserror::Error;

/// Failure modes of domain construction, field evaluation and the drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Geometry or stencil setup is impossible with the requested parameters.
    #[error("configuration error: {0}")]
    Config(String),
    /// A requested length scale is below what the grid can resolve.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// An input violates the documented precondition of an operation.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A model parameter is outside its admissible set.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// NaN or infinity appeared in a computed field.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The line search failed too many times in a row.
    #[error("stagnation after {iterations} iterations: {detail}")]
    Stagnation { iterations: usize, detail: String },
    /// Reading or writing a report failed.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
