use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by expression evaluation, quadrature, norm evaluation and the
/// decision procedures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WcoError {
    /// An inner map of a composition left the open unit disk, or an
    /// evaluation point was not strictly inside it.
    #[error("domain error at z = {z}: {reason}")]
    Domain { z: Complex64, reason: String },

    /// A real power met a value on the principal branch cut (the closed
    /// negative real axis).
    #[error("branch error: principal power undefined at base value {base}")]
    Branch { base: Complex64 },

    #[error("parameter error: {0}")]
    Parameter(String),

    /// The argument principle cannot be applied on a contour carrying a
    /// (near-)zero of the function.
    #[error("contour zero: min modulus {min_modulus:e} on |z| = {radius} is below threshold")]
    ContourZero { radius: f64, min_modulus: f64 },

    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("singular matrix: smallest singular value {0:e}")]
    SingularMatrix(f64),

    #[error("non-vanishing violation: {0}")]
    NonVanishingViolation(String),

    #[error("parse error at position {position}: expected {expected}")]
    Parse { position: usize, expected: String },

    #[error("non-finite value produced: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, WcoError>;
