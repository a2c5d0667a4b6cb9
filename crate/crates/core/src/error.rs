use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modular operator is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("J is not an antiunitary involution (residual {residual:e})")]
    NotInvolutive { residual: f64 },
    #[error("J Δ J differs from Δ^-1 (residual {residual:e})")]
    ModularMismatch { residual: f64 },
    #[error("eigenvalue pairing violated at index {index}: λ = {lambda}, λ_bar = {lambda_bar}")]
    BadPairing { index: usize, lambda: f64, lambda_bar: f64 },
    #[error("eigenvalue {0} is not positive")]
    NonPositiveEigenvalue(f64),
    #[error("norm parameter q = {0} must lie in [0, 1)")]
    InvalidNorm(f64),
    #[error("invalid twist parameters: {0}")]
    BadParams(String),
    #[error("dense object with {entries} entries exceeds the size cap {cap}")]
    SizeCapExceeded { entries: u128, cap: usize },
    #[error("P_T at level {level} is not strictly positive (min eigenvalue {min_eigenvalue:e})")]
    NotStrictlyPositive { level: usize, min_eigenvalue: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("truncation {got} is too small, need at least {needed}")]
    TruncationTooSmall { needed: usize, got: usize },
    #[error("{what}: {value} exceeds the cap {cap}")]
    CapExceeded { what: &'static str, value: usize, cap: usize },
    #[error("order is not admissible for the matching")]
    NotAdmissible,
    #[error("size {0} is not odd")]
    NotOdd(usize),
    #[error("{0} is not a singleton of the matching")]
    NotASingleton(usize),
    #[error("inconsistent sizes: {0}")]
    InconsistentSizes(String),
    #[error("matching is in the wrong case for this map: {0}")]
    WrongCase(&'static str),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("operation requires the real-orthonormal basis mode")]
    WrongBasisMode,
    #[error("invalid matching: {0}")]
    InvalidMatching(String),
    #[error("linear solve did not converge: {0}")]
    NoConvergence(String),
}
