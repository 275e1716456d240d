//! Sensitivity analysis for the parametric consumer problem
//!
//! ```text
//! v(p) = max { u(x) : x >= 0, <p, x> <= 1 }
//! ```
//!
//! on the nonnegative orthant. The crate computes the coderivative of the
//! budget map `B(p) = { x >= 0 : <p, x> <= 1 }`, assembles Fréchet, limiting
//! and singular subgradient estimates of `-v` from it, turns them into bounds
//! on the Dini directional derivatives of `v`, and checks every closed-form
//! answer against brute-force numerical oracles (difference quotients,
//! sampled normal tests, an empirical Aubin-inclusion test).
//!
//! Module map:
//!
//! - [`cone`]: the orthant `R^n_+`, its normal cones and membership tests.
//! - [`utility`]: the utility catalogue, gradients, upper subdifferentials and
//!   the non-satiety scan.
//! - [`budget`]: budget sets, projection onto them, the multiplier set of the
//!   coderivative formula and the support function of the resulting sets.
//! - [`demand`]: solvers for the demand map and the indirect utility.
//! - [`subdiff`]: the subgradient estimates of `-v` and rate-of-change bounds.
//! - [`oracles`]: independent numerical checks.
//! - [`cli`]: config-driven runs producing JSON reports and CSV series.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod cli;
pub mod cone;
pub mod demand;
mod error;
pub mod oracles;
pub mod subdiff;
pub mod utility;
pub(crate) mod vecops;

pub use budget::{
    budget_contains, coderivative_budget, lambda_set, kkt_multiplier, project_onto_budget,
    support_function, Coderivative, LambdaSet, RaySegment, RaySegmentSet,
};
pub use cone::{cone_contains, normal_cone_at, normal_cone_contains, NormalConeDescriptor, OrthantCone};
pub use demand::{
    demand, demand_closed_form, demand_grid, demand_projected_gradient, indirect_utility,
    DemandResult, Maximizers, SolveMethod, SolverConfig,
};
pub use error::{Error, Result};
pub use subdiff::{
    clarke_bound_support, frechet_subdiff_estimate, limiting_subdiff_estimate,
    rate_of_change_bounds, Estimate, Exactness, Hypotheses, Hypothesis, LimitingMode, RateBounds,
    SubdiffReport,
};
pub use utility::{check_nsc, NscReport, NscViolation, SubgradientSet, UtilityModel};

/// Absolute tolerance below which a bundle coordinate is treated as zero.
pub const DEFAULT_ACTIVE_TOL: f64 = 1e-9;

/// Absolute tolerance used to classify `<p, x> = 1` against `<p, x> < 1`.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;
