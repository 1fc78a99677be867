//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix required to be positive definite is not.
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// An enumeration or summation exceeded its configured budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// A series or iteration failed to converge within its caps.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Intermediate magnitudes exceeded what the precision context can absorb.
    #[error("precision budget exceeded: {0}")]
    Precision(String),

    /// A gamma factor was evaluated at a non-positive argument.
    #[error("gamma pole: {0}")]
    Pole(String),

    /// Fundamental-domain reduction did not stabilize within the iteration cap.
    #[error("reduction did not stabilize: {0}")]
    Reduction(String),

    /// A singular denominator appeared where the input promised none.
    #[error("singular denominator: {0}")]
    Singular(String),

    /// Malformed text input (matrix files, config files).
    #[error("parse error: {0}")]
    Parse(String),
}
