use thiserror::Error;

/// Errors raised by the library. Each variant corresponds to a violated
/// precondition; numerical findings (a failed inequality, an inexact
/// recovery) are reported through result values, never through `Error`.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(u64),

    #[error("moduli {0} and {1} are not coprime")]
    NotCoprime(u64, u64),

    #[error("modulus {0} is not squarefree")]
    NotSquarefree(u64),

    #[error("ring mismatch: expected modulus {expected}, got {found}")]
    RingMismatch { expected: u64, found: u64 },

    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("index {index} outside the parabola over Z/{modulus}")]
    NotOnParabola { index: usize, modulus: u64 },

    #[error("invalid exponent {0}")]
    InvalidExponent(f64),

    #[error("support size {max_support} is outside the forbidden zone (must be < {bound})")]
    OutsideForbiddenZone { max_support: usize, bound: f64 },

    #[error("least-squares system is singular: recovery from this support is not unique")]
    SingularGram,

    #[error("{0}")]
    Invalid(String),

    #[error("report schema mismatch: {0}")]
    Schema(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
