use thiserror::Error;

/// Errors shared by every module in this crate.
///
/// Exact enumeration is the default evaluation strategy, so the most common
/// failure is not numerical but combinatorial: an operation whose support
/// would outgrow the configured budget reports `BudgetExceeded` instead of
/// silently sampling.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoreError {
    #[error("empty range: lower bound exceeds upper bound")]
    EmptyRange,

    #[error("conditioning event has probability zero")]
    ZeroMass,

    #[error("enumeration would need {needed} weighted outcomes, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("invalid parameter: {0}")]
    BadParam(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    BadLength { expected: usize, found: usize },

    #[error("too few faces: n = {n} is below the minimum {min}")]
    TooFewFaces { n: usize, min: usize },

    #[error("gap level {level} outside the supported range 1..={max}")]
    BadLevel { level: usize, max: usize },

    #[error("stationary distribution is not unique: null space has dimension {dimension}")]
    NonUniqueStationary { dimension: usize },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("not a probability distribution: {0}")]
    InvalidDistribution(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
