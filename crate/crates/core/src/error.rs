use thiserror::Error;

/// Everything that can go wrong inside the library.
///
/// `NotPositiveDefinite` and `NonTimelike` are recoverable signals: the
/// bundle loop reacts to them by increasing the proximal parameter.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point is not on the manifold: {0}")]
    MembershipViolation(String),
    #[error("vector is not tangent at its base point: {0}")]
    TangencyViolation(String),
    #[error("tangent vectors live at different base points")]
    BaseMismatch,
    #[error("matrix is singular within tolerance")]
    SingularMatrix,
    #[error("symmetric eigendecomposition failed")]
    EigendecompositionFailure,
    #[error("retraction left the positive-definite cone")]
    NotPositiveDefinite,
    #[error("retraction produced a non-timelike vector")]
    NonTimelike,
    #[error("product point has {got} components, expected {expected}")]
    ComponentCountMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no active set of the cutting-plane model passed the optimality checks")]
    DegenerateModel,
    #[error("budget exhausted after {0} proximal parameter doublings")]
    BudgetExhausted(usize),
    #[error("oracle needs at least one data point")]
    EmptyData,
    #[error("subgradient step failed after repeated halving")]
    StepFailure,
}

impl Error {
    /// True for the retraction failures that the algorithms absorb by
    /// shrinking the step.
    pub fn is_retraction_failure(&self) -> bool {
        matches!(self, Error::NotPositiveDefinite | Error::NonTimelike)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
