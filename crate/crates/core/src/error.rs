//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `a` has no inverse modulo `m`.
    #[error("{a} is not invertible modulo {m}")]
    NotInvertible { a: i64, m: i64 },
    /// An argument that must be prime is not.
    #[error("{0} is not prime")]
    NotPrime(u64),
    /// The requested scaling convention does not exist for the given data.
    #[error("convention unavailable: {0}")]
    ConventionUnavailable(String),
    /// Bruhat data with `c ∤ ad − 1`.
    #[error("({a}, {d}; {c}) is not in the Bruhat cell: c does not divide ad - 1")]
    NotInCell { a: i64, d: i64, c: i64 },
    /// A Kloosterman modulus violating the coprimality requirement.
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    /// Parameters outside the documented domain.
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    /// Evaluation at a pole.
    #[error("pole at {0}")]
    PoleError(String),
    /// Two coefficient series of different lengths.
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    /// A weight-family-specific operation called with the wrong family.
    #[error("operation not available for weight family {0}")]
    FamilyError(String),
    /// Integral representation used outside its domain of convergence.
    #[error("domain error: {0}")]
    DomainError(String),
    /// No admissible vertical integration line separates the pole families.
    #[error("no admissible contour: {0}")]
    PathError(String),
    /// Parameter at a removable or genuine singularity of the formula.
    #[error("singular parameter: {0}")]
    SingularParameter(String),
    /// A truncated tail could not be bounded below the tolerance.
    #[error("tail not controlled: {0}")]
    TailError(String),
    /// Unknown identity id in the verification registry.
    #[error("unknown identity '{0}'")]
    UnknownIdentity(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
