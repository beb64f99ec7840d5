//! Error types shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by exact and certified computations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero: {0}")]
    DivisionByZero(String),
    #[error("tolerance must be positive")]
    InvalidTolerance,
    #[error("series failed its decay certificate: {0}")]
    NonConvergent(String),
    #[error("first parameter is not q^-n for any n <= {0}")]
    TerminationNotDetected(usize),
    #[error("lower Pochhammer parameter vanishes at step {0}")]
    SingularLowerParameter(usize),
    #[error("matrix size mismatch: {0}")]
    SizeMismatch(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("interpolation samples are inconsistent with the degree bound")]
    InconsistentSamples,
    #[error("not enough interpolation samples: need {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    #[error("interpolated degree {got} does not match expected degree {expected}")]
    InterpolationDegreeMismatch { expected: usize, got: usize },
    #[error("moment matrix of order {0} is singular")]
    SingularMomentMatrix(usize),
    #[error("compatibility product test failed at lattice index {0}")]
    CompatibilityViolated(usize),
    #[error("weight value at lattice index {0} is not Hermitian positive definite")]
    NotPositiveDefinite(usize),
    #[error("operator output keeps a z^{0} term, so it is not a polynomial")]
    NotPolynomial(i64),
    #[error("polynomial is not an eigenfunction of the operator")]
    NotAnEigenfunction,
    #[error("factor I - q^{0} C is singular")]
    SingularFactor(usize),
    #[error("series did not terminate by order {0}")]
    TerminationFailure(usize),
    #[error("constant term matrix of the tilde polynomial is singular at n = {0}")]
    SingularP0(usize),
    #[error("parameter domain violation: {0}")]
    DomainViolation(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistency(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
