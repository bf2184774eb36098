use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:e} at row {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("triangular matrix is singular (zero diagonal at row {index})")]
    SingularMatrix { index: usize },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal mass {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("log-product base must be positive, got {base} at term {index}")]
    NonPositiveBase { index: usize, base: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("piecewise-affine function needs at least one piece")]
    NoPieces,

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("set list is empty")]
    EmptySetList,

    #[error("invalid step schedule: {0}")]
    InvalidSchedule(String),

    #[error("zero subgradient at iteration {k} while f - f* = {gap:e} > 0")]
    ZeroSubgradient { k: usize, gap: f64 },

    #[error("optimal value f* = {f_star} exceeds f(x^{k}) = {value}")]
    InconsistentOptimalValue { k: usize, value: f64, f_star: f64 },

    #[error("starting point is not feasible (distance {distance:e})")]
    InfeasibleStart { distance: f64 },

    #[error("oracle does not declare the optimal value f_star")]
    MissingOptimalValue,

    #[error("oracle does not declare a subgradient bound B")]
    MissingSubgradientBound,

    #[error("bad indices k = {k}, N = {n}")]
    BadIndices { k: usize, n: usize },

    #[error("{0}")]
    BadMultipliers(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
