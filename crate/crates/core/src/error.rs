//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent configuration / input parameters.
    #[error("config error: {0}")]
    Config(String),

    /// The data moment violates the admissibility ray condition (or the
    /// angle selection degenerates), so no certificate can be produced.
    #[error("admissibility error: {0}")]
    Admissibility(String),

    /// A numerical procedure failed: quadrature did not converge, the
    /// solver hit a step limit, the truncated domain leaked, a fit had
    /// too few points, and so on.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 admissibility, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Admissibility(_) => 3,
            Error::Numerical(_) | Error::Domain(_) => 4,
            Error::Io(_) => 1,
        }
    }
}
