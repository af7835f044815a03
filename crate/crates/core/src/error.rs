use thiserror::Error;

use crate::index::Index;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("angle {0} lies outside [-pi, pi)")]
    AngleOutOfRange(f64),

    #[error("weights of length {weights} do not cover index {index}")]
    WeightsTooShort { weights: usize, index: Index },

    #[error("homomorphism weights must be nonzero (position {0})")]
    ZeroWeight(usize),

    #[error("order is degenerate on {0}: psi vanishes on a nonzero index")]
    DegenerateOrder(Index),

    #[error("operation requires a rev-lex or sign-twisted order")]
    UnsupportedOrder,

    #[error("integer overflow while building separating weights")]
    Overflow,

    #[error("block {block} contains index {index} outside Z^{block} \\ Z^{prev}", prev = .block - 1)]
    BlockViolation { block: usize, index: Index },

    #[error("input has a nonzero mean coefficient")]
    NonZeroMean,

    #[error("step {step} does not resolve the inner cutoff 1/n = {cutoff}")]
    UnresolvedCutoff { step: f64, cutoff: f64 },

    #[error("samples do not cover [t - n, t + n] for any output point")]
    InsufficientSamples,

    #[error("denominator norm {0:e} is too close to zero")]
    NearZeroDenominator(f64),

    #[error("invalid normed space: {0}")]
    InvalidSpace(String),

    #[error("invalid exponent p = {0}, expected 1 < p < inf")]
    InvalidExponent(f64),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("malformed martingale difference sequence: {0}")]
    MalformedMds(String),

    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),

    #[error("{0}")]
    Parse(String),
}
