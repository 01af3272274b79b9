use crate::ring::RingError;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("indices must differ")]
    EqualIndices,
    #[error("levels {m} and {n} are closer than two steps")]
    TooClose { m: u32, n: u32 },
    #[error("alpha = sqrt(beta^2 - 4x) vanishes; use the recurrence")]
    DegenerateAlpha,
    #[error("Q(b) is singular")]
    SingularQ,
    #[error("linear system is singular")]
    SingularSystem,
    #[error("formula requires f >= 3 (got f = {0})")]
    StrataTooLow(u32),
    #[error("square-root branch is ambiguous at this point")]
    BranchAmbiguity,
    #[error("geometric sum diverges: |u P(H<N) K| = {0} >= 1")]
    DivergentGeometricSum(f64),
    #[error("enumeration budget of {0} edges exceeded")]
    BudgetExceeded(u64),
    #[error("empty path")]
    EmptyPath,
    #[error("trajectory {index} exceeded the step cap")]
    StepCapExceeded { index: u64 },
    #[error("statistic is defined only for a = b")]
    HomogeneousOnly,
    #[error("at least two samples are required")]
    TooFewSamples,
    #[error("characteristic function has not decayed at the truncation point (|cf(T)| = {0})")]
    TailNotDecayed(f64),
    #[error("identity check failed: {0}")]
    IdentityViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
