use thiserror::Error;

/// Errors raised by the library.
///
/// Rejections that carry a diagnostic reason (e.g. a polynomial that is not
/// Salem) are not errors; they are returned as ordinary values by the
/// relevant operation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero polynomial is not allowed here")]
    ZeroPolynomial,
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("polynomial is not reciprocal")]
    NotReciprocal,
    #[error("polynomial has odd degree {0}")]
    OddDegree(usize),
    #[error("polynomial is not a Salem polynomial: {0}")]
    NotSalem(String),
    #[error("exponent must be positive")]
    ZeroExponent,
    #[error("{0}(1) or {0}(-1) vanishes, so -s(1)s(-1) has no square class")]
    ZeroAtUnit(&'static str),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("Gram matrix is not symmetric")]
    NotSymmetric,
    #[error("Gram matrix is degenerate")]
    Degenerate,
    #[error("lattice is not even")]
    NotEven,
    #[error("lattice is indefinite")]
    Indefinite,
    #[error("lattice has signature ({0}, {1}), expected {2}")]
    WrongSignature(usize, usize, String),
    #[error("sublattice is not primitive; its saturation has basis {saturation:?}")]
    NotPrimitive { saturation: Vec<Vec<String>> },
    #[error("subgroup is not isotropic: {0}")]
    NotIsotropic(String),
    #[error("vector does not lie in the dual lattice")]
    NotInDual,
    #[error("invalid glue map: {0}")]
    InvalidGlueMap(String),
    #[error("overlattice is not integral")]
    NonIntegralOverlattice,
    #[error("matrix is not an isometry of the lattice")]
    NotIsometry,
    #[error("characteristic polynomial is not integral")]
    NonIntegralCharPoly,
    #[error("polynomial does not divide the characteristic polynomial")]
    NotADivisor,
    #[error("twisting element does not map the lattice into itself")]
    NonIntegralTwist,
    #[error("p = {0} is not an odd prime")]
    NotOddPrime(String),
    #[error("{0} is not prime")]
    NotPrime(String),
    #[error("modulus {0} is too large for word-sized arithmetic")]
    ModulusTooLarge(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("search limit exceeded: {0}")]
    SearchExhausted(String),
    #[error("interval refinement did not converge within {0} bits")]
    Precision(u32),
    #[error("certificate pipeline failed at stage `{stage}`: {reason}")]
    Pipeline { stage: &'static str, reason: String },
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
