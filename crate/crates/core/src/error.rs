use thiserror::Error;

/// Errors raised by the numerical routines and the physics layers built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid integration range [{a}, {b}]")]
    InvalidRange { a: f64, b: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {subdivisions} subdivisions")]
    NonConvergence {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("log grid too coarse: half-resolution difference {difference:e} exceeds {tolerance:e}")]
    GridTooCoarse { difference: f64, tolerance: f64 },

    #[error("zero proposal density at a point where the integrand is {integrand:e}")]
    ZeroDensity { integrand: f64 },

    #[error("the Mellin method only applies at zeta = 0 (got {zeta})")]
    MethodMismatch { zeta: f64 },

    #[error("series truncated at k = {k_max}: tail estimate {tail:e} exceeds tolerance (partial value {value:e})")]
    TruncationWarning { value: f64, tail: f64, k_max: usize },

    #[error("duplicate partial-wave channel (l = {l}, m_z = {m_z})")]
    DuplicateChannel { l: usize, m_z: i64 },

    #[error("Lambda(m, N) = {lambda_mn} >= 1: no lower bound in the unstable regime")]
    UnstableRegime { lambda_mn: f64 },

    #[error("operation requires N = {expected}, got N = {got}")]
    WrongN { expected: usize, got: usize },

    #[error("N = {0} is not supported by the Monte Carlo evaluator (N = 3 only)")]
    UnsupportedN(usize),

    #[error("bump profile rejected: {0}")]
    BadProfile(String),

    #[error("orbital supports overlap: beta = {beta} > n = {n}")]
    SupportOverlap { beta: f64, n: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
