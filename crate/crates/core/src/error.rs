use thiserror::Error;

/// Every failure the toolkit can report.
///
/// Several variants double as divergence signals inside an integrator: a
/// trajectory that hits one of them is rejected by the sampler rather than
/// aborting the chain (see [`GeomcError::is_divergence`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomcError {
    #[error("matrix is numerically singular (pivot {pivot:e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("matrix is not positive definite (diagonal update {value:e} at row {row})")]
    NotPositiveDefinite { row: usize, value: f64 },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value encountered in {what}")]
    NonFinite { what: &'static str },

    #[error("state left the numerically safe region: {reason}")]
    NonFiniteState { reason: String },

    #[error("position {q:?} is outside the model domain")]
    OutOfDomain { q: Vec<f64> },

    #[error("fixed-point iteration did not converge after {iters} iterations (last change {change:e})")]
    FixedPointDivergence { iters: usize, change: f64 },

    #[error("step size outside the stability region: eps^2 omega^2 = {value} >= 4")]
    UnstableRegime { value: f64 },

    #[error("reference grid lost {mass:e} of probability mass")]
    GridUnderflow { mass: f64 },

    #[error("chain has no transitions")]
    EmptyChain,

    #[error("chain has zero variance")]
    DegenerateChain,

    #[error("chain is too short for this diagnostic: {len} < {min}")]
    ChainTooShort { len: usize, min: usize },

    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("data error: {0}")]
    Data(String),
}

impl GeomcError {
    /// True for failures that mean "this proposal is unusable" rather than
    /// "the caller made a mistake".
    pub fn is_divergence(&self) -> bool {
        matches!(
            self,
            GeomcError::SingularMatrix { .. }
                | GeomcError::NotPositiveDefinite { .. }
                | GeomcError::NonFinite { .. }
                | GeomcError::NonFiniteState { .. }
                | GeomcError::OutOfDomain { .. }
                | GeomcError::FixedPointDivergence { .. }
        )
    }

    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        GeomcError::InvalidArgument {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = GeomcError> = std::result::Result<T, E>;
