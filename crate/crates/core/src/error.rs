use thiserror::Error;

/// Errors raised by the toolkit. Numeric payloads are reported as `f64` regardless of the
/// scalar type used for the computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported differentiation order {0} (at most 2)")]
    UnsupportedOrder(u32),

    #[error("radius must be strictly positive, found {value} at node {node}")]
    NonpositiveRadius { node: usize, value: f64 },

    #[error("profile slope {slope} at t = {t} is too steep to embed as a graph")]
    SlopeTooSteep { t: f64, slope: f64 },

    #[error("eigenvalue asymptotic fit failed: leading coefficient {0} is not positive")]
    FitFailed(f64),

    #[error("no convergence after {iterations} iterations (final residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("eigenvalue search stalled for index {index}: {reason}")]
    SolverStall { index: usize, reason: String },

    #[error("boundary value {value:e} in norming constant for index {index} is degenerate")]
    DegenerateBoundaryValue { index: usize, value: f64 },

    #[error("lambda = {lambda} lies within {tol:e} of the pole at index {index}")]
    PoleHit { index: usize, lambda: f64, tol: f64 },

    #[error("inverse problem requires q0 = 0 or E = 0 (got q0 = {q0}, E = {e})")]
    HypothesisViolation { q0: f64, e: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
