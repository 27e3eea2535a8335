//! Error type shared across the crate.

use std::fmt;

/// Errors produced by key generation, algebra and decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Two circulants (or QC matrices) with different block sizes were combined.
    BlockSizeMismatch { left: usize, right: usize },
    /// Block-grid or vector dimensions do not line up for the requested product.
    DimensionMismatch(String),
    /// A support index is outside `[0, p)`.
    IndexOutOfRange { index: usize, p: usize },
    /// The matrix (or circulant) has no inverse over GF(2)[x]/(x^p - 1).
    Singular,
    /// A profile fails one of its structural or security constraints.
    InvalidProfile(String),
    /// No object with the requested combinatorial structure can exist.
    InfeasibleProfile(String),
    /// Rejection sampling ran out of attempts.
    GenerationExhausted { what: &'static str, attempts: u64 },
    /// The iterative decoder did not reach a zero syndrome.
    DecodingFailure,
    /// A numeric argument is outside the valid domain.
    DomainError(String),
    /// Malformed key file, ciphertext file or parameter file.
    Format(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::BlockSizeMismatch { left, right } => {
                write!(f, "block size mismatch: {left} vs {right}")
            }
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::IndexOutOfRange { index, p } => {
                write!(f, "support index {index} out of range for block size {p}")
            }
            Error::Singular => write!(f, "matrix is singular"),
            Error::InvalidProfile(msg) => write!(f, "invalid profile: {msg}"),
            Error::InfeasibleProfile(msg) => write!(f, "infeasible profile: {msg}"),
            Error::GenerationExhausted { what, attempts } => {
                write!(f, "generation of {what} exhausted after {attempts} attempts")
            }
            Error::DecodingFailure => write!(f, "decoding failure"),
            Error::DomainError(msg) => write!(f, "domain error: {msg}"),
            Error::Format(msg) => write!(f, "format error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
