//! Subgradient estimates of `-v` at a price `p̄` and the resulting bounds on
//! the Dini directional derivatives of `v`.
//!
//! All three estimates are built from values of the budget-map coderivative
//! at `x̄`, taken over subgradient covectors of `u`:
//!
//! - Fréchet: intersection over `x* ∈ -∂̂u(x̄)` of `D*B(p̄, x̄)(x*)`;
//! - limiting: union over `x* ∈ ∂⁺u(x̄)` of `{ λ x̄ : λ >= 0, x* - λ p̄ ∈ N(x̄; R^n_+) }`;
//! - singular: the same union over `x* ∈ ∂^{∞,+}u(x̄)`.
//!
//! Hypotheses that cannot be checked numerically are caller assertions
//! ([`Hypotheses`]). Without them results are labelled
//! [`Exactness::UpperBound`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::budget::{
    check_graph_point, coderivative_budget, kkt_multiplier, on_budget_line, support_function, LambdaSet,
    RaySegmentSet,
};
use crate::demand::Maximizers;
use crate::utility::{in_normal_cone, SubgradientSet, UtilityModel};
use crate::vecops::check_dim;
use crate::{Error, Result};

/// Number of interior points used to discretize a segment of demand points.
const DEMAND_SEGMENT_INTERIOR: usize = 99;

/// Hypotheses a caller may assert to unlock sharper conclusions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// Every demand point saturates the budget.
    NonSatiety,
    /// The demand map is inner semicontinuous at `(p̄, x̄)`.
    InnerSemicontinuity,
    /// The demand map admits a selection that is upper Lipschitzian at `p̄`.
    UpperLipschitzianSelection,
    /// `v` is directionally Lipschitzian at `p̄`.
    DirectionalLipschitz,
}

/// A set of asserted hypotheses.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Hypotheses(BTreeSet<Hypothesis>);

impl Hypotheses {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with(mut self, h: Hypothesis) -> Self {
        self.0.insert(h);
        self
    }

    pub fn insert(&mut self, h: Hypothesis) {
        self.0.insert(h);
    }

    pub fn contains(&self, h: Hypothesis) -> bool {
        self.0.contains(&h)
    }

    pub fn iter(&self) -> impl Iterator<Item = Hypothesis> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<Hypothesis> for Hypotheses {
    fn from_iter<I: IntoIterator<Item = Hypothesis>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    /// The estimate equals the subdifferential.
    Exact,
    /// The subdifferential is contained in the estimate.
    UpperBound,
    /// The estimate is empty, hence so is the subdifferential.
    EmptyByTheorem,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub set: RaySegmentSet,
    pub exactness: Exactness,
}

impl Estimate {
    fn bound(set: RaySegmentSet) -> Self {
        let exactness = if set.is_empty() { Exactness::EmptyByTheorem } else { Exactness::UpperBound };
        Self { set, exactness }
    }
}

/// Which demand points the limiting and singular estimates range over.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitingMode {
    /// A single demand point; requires [`Hypothesis::InnerSemicontinuity`].
    InnerSemicontinuous { x_bar: Vec<f64> },
    /// The whole demand set; requires [`Hypothesis::NonSatiety`].
    InnerSemicompact { demand: Maximizers },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdiffReport {
    pub p_bar: Vec<f64>,
    /// Demand points the estimates were assembled from.
    pub demand_points: Vec<Vec<f64>>,
    /// `None` when the Fréchet estimate does not apply (for instance when
    /// `∂̂u(x̄)` is empty).
    pub frechet: Option<Estimate>,
    pub limiting: Estimate,
    pub singular: Estimate,
    pub hypotheses_used: Vec<Hypothesis>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateBounds {
    pub direction: Vec<f64>,
    /// Upper bound on `d⁺v(p̄; q)`; `+∞` when no Fréchet estimate is available.
    pub upper: f64,
    /// Lower bound on `d⁻v(p̄; q)`; `-∞` unless directional Lipschitzness is
    /// asserted.
    pub lower: f64,
    /// `α(q)`, the support of limiting plus singular estimates.
    pub clarke_support: f64,
}

/// Multiplier set of a coderivative value on the ray through `x̄`.
fn as_lambda(set: &RaySegmentSet) -> LambdaSet {
    match set {
        RaySegmentSet::Empty => LambdaSet::Empty,
        RaySegmentSet::ZeroSingleton => LambdaSet::Singleton(0.0),
        RaySegmentSet::Union(segs) => segs.iter().fold(LambdaSet::Empty, |acc, s| acc.hull(&s.lambdas)),
    }
}

fn negated(g: &[f64]) -> Vec<f64> {
    g.iter().map(|v| -v).collect()
}

/// Fréchet estimate of `∂̂(-v)(p̄)` at a demand point `x̄`.
///
/// With [`Hypothesis::UpperLipschitzianSelection`] asserted and `u`
/// differentiable at `x̄`, returns the exact set `{<∇u(x̄), x̄> x̄}` (or `{0}`
/// strictly inside the budget). Otherwise the intersection over the extreme
/// points of `∂̂u(x̄)`, which equals the full intersection because the
/// multiplier constraints are jointly convex in `(x*, λ)`.
///
/// The caller certifies `x̄ ∈ D(p̄)`.
pub fn frechet_subdiff_estimate(
    u: &UtilityModel,
    p_bar: &[f64],
    x_bar: &[f64],
    hyps: &Hypotheses,
    tol: f64,
) -> Result<Estimate> {
    check_dim(u.dim(), p_bar)?;
    check_graph_point(p_bar, x_bar, tol)?;
    let lower = u.lower_frechet_subdifferential(x_bar)?;
    if lower.is_empty() {
        return Err(Error::HypothesisViolated("the lower Fréchet subdifferential of u at x̄ is empty".into()));
    }
    let on_line = on_budget_line(p_bar, x_bar, tol);

    if hyps.contains(Hypothesis::UpperLipschitzianSelection) && u.is_differentiable_at(x_bar) {
        let g = u.gradient(x_bar)?;
        let lambda = kkt_multiplier(p_bar, x_bar, &g, tol)?;
        let set = if on_line { RaySegmentSet::segment(x_bar.to_vec(), lambda) } else { RaySegmentSet::ZeroSingleton };
        return Ok(Estimate { set, exactness: Exactness::Exact });
    }

    let mut lambda = LambdaSet::Ray { lo: 0.0 };
    for g in lower.extreme_points() {
        let value = coderivative_budget(p_bar, x_bar, &negated(&g), tol)?.into_set();
        lambda = lambda.intersect(&as_lambda(&value));
    }
    let set = if on_line {
        RaySegmentSet::segment(x_bar.to_vec(), lambda)
    } else if lambda.is_empty() {
        RaySegmentSet::Empty
    } else {
        RaySegmentSet::ZeroSingleton
    };
    Ok(Estimate::bound(set))
}

/// Union over `x* ∈ set` of `{ λ x̄ : λ >= 0, x* - λ p̄ ∈ N(x̄; R^n_+) }`.
fn union_over_covectors(p_bar: &[f64], x_bar: &[f64], set: &SubgradientSet, tol: f64) -> Result<RaySegmentSet> {
    match set {
        SubgradientSet::Empty => Ok(RaySegmentSet::Empty),
        SubgradientSet::Singleton(g) => Ok(coderivative_budget(p_bar, x_bar, &negated(g), tol)?.into_set()),
        SubgradientSet::Interval1D { lo, hi } => {
            // One good, x̄ > 0: the constraint reads x* = λ p̄.
            if on_budget_line(p_bar, x_bar, tol) {
                let lambda = LambdaSet::interval(lo.max(0.0) / p_bar[0], hi / p_bar[0]);
                Ok(RaySegmentSet::segment(x_bar.to_vec(), lambda))
            } else if *lo <= tol && *hi >= -tol {
                Ok(RaySegmentSet::ZeroSingleton)
            } else {
                Ok(RaySegmentSet::Empty)
            }
        }
    }
}

/// Limiting and singular estimates of `∂(-v)(p̄)` and `∂^∞(-v)(p̄)`, plus the
/// Fréchet estimate at the first demand point when it applies.
///
/// Checks the qualification condition `∂^{∞,+}u(x̄) ∩ N(x̄; R^n_+) = {0}` at
/// every demand point used. A segment of demand points is discretized at its
/// endpoints and 99 interior points.
pub fn limiting_subdiff_estimate(
    u: &UtilityModel,
    p_bar: &[f64],
    mode: &LimitingMode,
    hyps: &Hypotheses,
    tol: f64,
) -> Result<SubdiffReport> {
    check_dim(u.dim(), p_bar)?;
    let mut used = Vec::new();
    let points = match mode {
        LimitingMode::InnerSemicontinuous { x_bar } => {
            if !hyps.contains(Hypothesis::InnerSemicontinuity) {
                return Err(Error::MissingHypothesis(Hypothesis::InnerSemicontinuity));
            }
            used.push(Hypothesis::InnerSemicontinuity);
            vec![x_bar.clone()]
        }
        LimitingMode::InnerSemicompact { demand } => {
            if !hyps.contains(Hypothesis::NonSatiety) {
                return Err(Error::MissingHypothesis(Hypothesis::NonSatiety));
            }
            used.push(Hypothesis::NonSatiety);
            let pts = demand.sample_points(DEMAND_SEGMENT_INTERIOR);
            if let Some(x) = pts.iter().find(|x| x.len() == p_bar.len() && !on_budget_line(p_bar, x, tol)) {
                return Err(Error::HypothesisViolated(format!(
                    "non-satiety asserted but demand point {x:?} is strictly inside the budget"
                )));
            }
            pts
        }
    };
    if points.is_empty() {
        return Err(Error::EmptyEstimate);
    }

    let mut limiting = RaySegmentSet::Empty;
    let mut singular = RaySegmentSet::Empty;
    let mut all_differentiable = true;
    for x in &points {
        check_graph_point(p_bar, x, tol)?;
        let sing = u.singular_upper_subdifferential(x)?;
        for z in sing.extreme_points() {
            if z.iter().any(|v| v.abs() > tol) && in_normal_cone(x, &z, tol)? {
                return Err(Error::QualificationFailure { covector: z });
            }
        }
        singular = singular.union(&union_over_covectors(p_bar, x, &sing, tol)?);
        limiting = limiting.union(&union_over_covectors(p_bar, x, &u.upper_subdifferential(x)?, tol)?);
        all_differentiable &= u.is_differentiable_at(x);
    }

    let selection = hyps.contains(Hypothesis::UpperLipschitzianSelection);
    let limiting = if limiting.is_empty() {
        Estimate { set: limiting, exactness: Exactness::EmptyByTheorem }
    } else if selection && all_differentiable {
        Estimate { set: limiting, exactness: Exactness::Exact }
    } else {
        Estimate { set: limiting, exactness: Exactness::UpperBound }
    };
    // The singular subdifferential always contains 0, so a bound of {0} is exact.
    let singular = match singular {
        RaySegmentSet::ZeroSingleton => Estimate { set: singular, exactness: Exactness::Exact },
        RaySegmentSet::Empty => {
            return Err(Error::HypothesisViolated("singular estimate is empty but must contain 0".into()))
        }
        set => Estimate { set, exactness: Exactness::UpperBound },
    };

    let frechet = match frechet_subdiff_estimate(u, p_bar, &points[0], hyps, tol) {
        Ok(e) => Some(e),
        Err(Error::HypothesisViolated(_)) | Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let exact_somewhere = limiting.exactness == Exactness::Exact
        || frechet.as_ref().is_some_and(|f| f.exactness == Exactness::Exact);
    if selection && exact_somewhere {
        used.push(Hypothesis::UpperLipschitzianSelection);
    }

    Ok(SubdiffReport { p_bar: p_bar.to_vec(), demand_points: points, frechet, limiting, singular, hypotheses_used: used })
}

/// `α(q) = σ_limiting(q) + σ_singular(q)`, the support function of the
/// Clarke-type hull of the limiting and singular estimates.
pub fn clarke_bound_support(report: &SubdiffReport, q: &[f64]) -> Result<f64> {
    if report.limiting.set.is_empty() || report.singular.set.is_empty() {
        return Err(Error::EmptyEstimate);
    }
    Ok(support_function(&report.limiting.set, q)? + support_function(&report.singular.set, q)?)
}

/// Bounds `d⁻v(p̄; q) >= -α(q)` and `d⁺v(p̄; q) <= -σ_frechet(q)`.
///
/// The lower bound needs [`Hypothesis::DirectionalLipschitz`]; without it,
/// or when the limiting estimate is empty, it is `-∞`.
pub fn rate_of_change_bounds(report: &SubdiffReport, q: &[f64], hyps: &Hypotheses) -> Result<RateBounds> {
    check_dim(report.p_bar.len(), q)?;
    let upper = match &report.frechet {
        Some(e) => 0.0 - support_function(&e.set, q)?,
        None => f64::INFINITY,
    };
    let clarke_support = match clarke_bound_support(report, q) {
        Ok(a) => a,
        Err(Error::EmptyEstimate) => f64::NEG_INFINITY,
        Err(e) => return Err(e),
    };
    let lower = if hyps.contains(Hypothesis::DirectionalLipschitz) && clarke_support > f64::NEG_INFINITY {
        // `0 - x` rather than `-x` keeps a zero bound from printing as -0.
        0.0 - clarke_support
    } else {
        f64::NEG_INFINITY
    };
    Ok(RateBounds { direction: q.to_vec(), upper, lower, clarke_support })
}
