//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input: bad geometry, wrong sizes, non-positive gaps, and so on.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iteration failed to converge within its budget.
    #[error("non-convergence: {0}")]
    NonConvergence(String),

    /// A computed quantity violated its accuracy contract.
    #[error("accuracy failure: {0}")]
    Accuracy(String),

    /// Evaluation point falls inside the near-boundary zone of a plain
    /// trapezoid evaluation; use the close-evaluation path instead.
    #[error("point at distance {dist:.3e} is inside the near zone (threshold {threshold:.3e}); use near_eval")]
    NearZone { dist: f64, threshold: f64 },

    /// Dense linear algebra failed (singular factorization, eigensolver breakdown).
    #[error("linear algebra failure: {0}")]
    Linalg(String),

    /// Configuration file problems.
    #[error("config error: {0}")]
    Config(String),

    /// Output emission problems.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn accuracy(msg: impl Into<String>) -> Self {
        Error::Accuracy(msg.into())
    }

    /// Process exit code for the CLI: 2 config, 3 numerical, 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Domain(_) => 2,
            Error::Io(_) => 4,
            _ => 3,
        }
    }
}
