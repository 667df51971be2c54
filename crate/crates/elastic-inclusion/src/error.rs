use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input data violate a documented invariant.
    #[error("validation: {0}")]
    Validation(String),
    /// A point lies outside the region where an expansion is valid.
    #[error("domain: {0}")]
    Domain(String),
    /// The map derivative vanishes (numerically) at an evaluation point.
    #[error("singular map derivative at w = {0}")]
    SingularPoint(String),
    /// Matrices or vectors of different truncation orders were combined.
    #[error("order mismatch: expected {expected}, got {got}")]
    OrderMismatch { expected: usize, got: usize },
    /// A requested series coefficient lies outside the exact window.
    #[error("laurent window too small: {0}")]
    WindowTooSmall(String),
    /// Operation is not defined in cavity mode.
    #[error("undefined in cavity mode: {0}")]
    CavityMode(String),
    /// Linear solve failed or the residual exceeds the threshold.
    #[error("solve: {0}")]
    Solve(String),
}

pub type Result<T> = std::result::Result<T, Error>;
