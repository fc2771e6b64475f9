use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its mathematical domain (t <= 0, p < 1, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Integer overflow in exact lattice arithmetic.
    #[error("integer overflow: {0}")]
    Overflow(String),

    /// An enumeration or quadrature would exceed the configured budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// Grid spacing does not resolve the requested cell structure.
    #[error("resolution mismatch: {0}")]
    Resolution(String),

    /// A structural precondition failed (padding, separation, subsequence, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Quadrature could not reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
