use thiserror::Error;

use crate::subdiff::Hypothesis;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate {index} = {value} lies outside the nonnegative orthant")]
    OutsideCone { index: usize, value: f64 },

    #[error("invalid utility model: {0}")]
    InvalidModel(String),

    #[error("utility is not differentiable here: {0}")]
    NotDifferentiable(String),

    #[error("unsupported model/point combination: {0}")]
    Unsupported(String),

    #[error("price coordinate {index} = {value} is not in the interior of the price cone")]
    BoundaryPrice { index: usize, value: f64 },

    #[error("the base bundle is the origin")]
    ZeroBundle,

    #[error("bundle is outside the budget set (<p, x> = {value})")]
    OutsideBudget { value: f64 },

    #[error("projection onto an unbounded budget set requested for an unbounded point")]
    UnboundedProjection,

    #[error("active set is ambiguous at coordinate {index} (value {value})")]
    AmbiguousActiveSet { index: usize, value: f64 },

    #[error("(p, x) is not a demand pair: {0}")]
    NotDemandPair(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("grid has {points} points, above the cap of {cap}")]
    GridTooLarge { points: u64, cap: u64 },

    #[error("demand is indeterminate: {0}")]
    Indeterminate(String),

    #[error("utility is unbounded on the budget set")]
    UnboundedUtility,

    #[error("hypothesis {0:?} is required but was not asserted")]
    MissingHypothesis(Hypothesis),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("qualification condition fails: nonzero singular upper subgradient {covector:?} lies in the normal cone")]
    QualificationFailure { covector: Vec<f64> },

    #[error("the limiting estimate is empty")]
    EmptyEstimate,

    #[error("p̄ + t q leaves the interior of the price cone at t = {step}")]
    LeavesPriceCone { step: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
