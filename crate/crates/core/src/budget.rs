//! Budget sets `B(p) = { x >= 0 : <p, x> <= 1 }` and the coderivative of the
//! budget map.
//!
//! For an interior price `p̄` and a nonzero `x̄ ∈ B(p̄)` the budget map is
//! graphically regular, and its Fréchet and limiting coderivatives coincide:
//!
//! ```text
//! D*B(p̄, x̄)(x*) = { λ x̄ : λ >= 0, x* + λ p̄ ∈ -N(x̄; R^n_+) }   if <p̄, x̄> = 1
//!               = {0}                                         if <p̄, x̄> < 1 and x* ∈ -N(x̄; R^n_+)
//!               = ∅                                           otherwise
//! ```
//!
//! Sets of this shape (unions of segments on rays through bundles) are
//! carried by [`RaySegmentSet`].

use std::cmp::Ordering;

use crate::cone::{normal_cone_at, normal_cone_contains, NormalConeDescriptor, OrthantCone};
use crate::vecops::{check_dim, dot, norm};
use crate::{Error, Result, DEFAULT_ACTIVE_TOL};

/// Inactive coordinates closer to zero than this multiple of the active-set
/// tolerance make the active set ambiguous.
const AMBIGUITY_FACTOR: f64 = 100.0;

/// A closed subset of `[0, ∞)` of the multipliers `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSet {
    Empty,
    Singleton(f64),
    Interval { lo: f64, hi: f64 },
    Ray { lo: f64 },
}

impl LambdaSet {
    /// Builds `[lo, hi]`, collapsing degenerate intervals.
    pub fn interval(lo: f64, hi: f64) -> Self {
        let lo = lo.max(0.0);
        if hi < lo {
            LambdaSet::Empty
        } else if hi == lo {
            LambdaSet::Singleton(lo)
        } else if hi.is_infinite() {
            LambdaSet::Ray { lo }
        } else {
            LambdaSet::Interval { lo, hi }
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, LambdaSet::Empty)
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            LambdaSet::Empty => None,
            LambdaSet::Singleton(l) => Some((l, l)),
            LambdaSet::Interval { lo, hi } => Some((lo, hi)),
            LambdaSet::Ray { lo } => Some((lo, f64::INFINITY)),
        }
    }

    pub fn contains(&self, lambda: f64, tol: f64) -> bool {
        self.bounds().is_some_and(|(lo, hi)| lambda >= lo - tol && lambda <= hi + tol)
    }

    pub fn intersect(&self, other: &LambdaSet) -> LambdaSet {
        match (self.bounds(), other.bounds()) {
            (Some((a, b)), Some((c, d))) => LambdaSet::interval(a.max(c), b.min(d)),
            _ => LambdaSet::Empty,
        }
    }

    /// Smallest set of the same kind containing both.
    pub fn hull(&self, other: &LambdaSet) -> LambdaSet {
        match (self.bounds(), other.bounds()) {
            (Some((a, b)), Some((c, d))) => LambdaSet::interval(a.min(c), b.max(d)),
            (Some(_), None) => *self,
            (None, _) => *other,
        }
    }

    /// `sup { λ s : λ ∈ Λ }`.
    pub fn sup_scaled(&self, s: f64) -> f64 {
        match self.bounds() {
            None => f64::NEG_INFINITY,
            Some((lo, hi)) => {
                if s > 0.0 {
                    if hi.is_infinite() {
                        f64::INFINITY
                    } else {
                        hi * s
                    }
                } else if s < 0.0 {
                    lo * s
                } else {
                    0.0
                }
            }
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, LambdaSet::Singleton(l) if *l == 0.0)
    }
}

/// `{ λ base : λ ∈ lambdas }`.
#[derive(Debug, Clone, PartialEq)]
pub struct RaySegment {
    pub base: Vec<f64>,
    pub lambdas: LambdaSet,
}

/// Canonical form of coderivative values and subgradient estimates.
#[derive(Debug, Clone, PartialEq)]
pub enum RaySegmentSet {
    Empty,
    ZeroSingleton,
    /// Nonempty segments on rays through nonzero base points, sorted by base.
    Union(Vec<RaySegment>),
}

impl RaySegmentSet {
    pub fn segment(base: Vec<f64>, lambdas: LambdaSet) -> Self {
        Self::from_segments(vec![RaySegment { base, lambdas }])
    }

    /// Canonicalizes a list of segments: empty multiplier sets and zero
    /// bases are dropped, and a union of zero segments collapses to `{0}`.
    pub fn from_segments(segments: Vec<RaySegment>) -> Self {
        let mut has_zero = false;
        let mut kept: Vec<RaySegment> = Vec::new();
        for s in segments {
            if s.lambdas.is_empty() {
                continue;
            }
            if s.lambdas.is_zero() || s.base.iter().all(|&b| b == 0.0) {
                has_zero = true;
                continue;
            }
            kept.push(s);
        }
        if kept.is_empty() {
            return if has_zero { RaySegmentSet::ZeroSingleton } else { RaySegmentSet::Empty };
        }
        if has_zero && !kept.iter().any(|s| s.lambdas.contains(0.0, 0.0)) {
            let base = kept[0].base.clone();
            kept.push(RaySegment { base, lambdas: LambdaSet::Singleton(0.0) });
        }
        kept.sort_by(|a, b| {
            a.base
                .iter()
                .zip(&b.base)
                .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
                .then(a.lambdas.bounds().map(|b| b.0).partial_cmp(&b.lambdas.bounds().map(|b| b.0)).unwrap_or(Ordering::Equal))
        });
        kept.dedup();
        RaySegmentSet::Union(kept)
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, RaySegmentSet::Empty)
    }

    pub fn segments(&self) -> &[RaySegment] {
        match self {
            RaySegmentSet::Union(s) => s,
            _ => &[],
        }
    }

    pub fn contains_zero(&self) -> bool {
        match self {
            RaySegmentSet::Empty => false,
            RaySegmentSet::ZeroSingleton => true,
            RaySegmentSet::Union(segs) => segs.iter().any(|s| s.lambdas.contains(0.0, 0.0)),
        }
    }

    /// Membership of a covector, up to `tol` in the multiplier.
    pub fn contains(&self, xi: &[f64], tol: f64) -> bool {
        match self {
            RaySegmentSet::Empty => false,
            RaySegmentSet::ZeroSingleton => xi.iter().all(|v| v.abs() <= tol),
            RaySegmentSet::Union(segs) => segs.iter().any(|s| {
                let bb = dot(&s.base, &s.base);
                let lambda = dot(xi, &s.base) / bb;
                let resid = xi.iter().zip(&s.base).map(|(x, b)| (x - lambda * b).abs()).fold(0.0, f64::max);
                resid <= tol && s.lambdas.contains(lambda, tol)
            }),
        }
    }

    pub fn union(&self, other: &RaySegmentSet) -> RaySegmentSet {
        match (self, other) {
            (RaySegmentSet::Empty, x) | (x, RaySegmentSet::Empty) => x.clone(),
            (RaySegmentSet::ZeroSingleton, RaySegmentSet::ZeroSingleton) => RaySegmentSet::ZeroSingleton,
            _ => {
                let mut segs: Vec<RaySegment> = Vec::new();
                for s in [self, other] {
                    match s {
                        RaySegmentSet::ZeroSingleton => {
                            segs.push(RaySegment { base: vec![0.0], lambdas: LambdaSet::Singleton(0.0) })
                        }
                        RaySegmentSet::Union(v) => segs.extend(v.iter().cloned()),
                        RaySegmentSet::Empty => {}
                    }
                }
                RaySegmentSet::from_segments(segs)
            }
        }
    }
}

/// Value of the budget-map coderivative at a graph point.
///
/// The map is graphically regular there, so [`frechet`](Self::frechet) and
/// [`limiting`](Self::limiting) return the same object.
#[derive(Debug, Clone, PartialEq)]
pub struct Coderivative {
    value: RaySegmentSet,
}

impl Coderivative {
    pub fn frechet(&self) -> &RaySegmentSet {
        &self.value
    }

    pub fn limiting(&self) -> &RaySegmentSet {
        &self.value
    }

    pub fn into_set(self) -> RaySegmentSet {
        self.value
    }
}

fn check_price_cone(p: &[f64]) -> Result<()> {
    if let Some((index, &value)) = p.iter().enumerate().find(|(_, &v)| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::OutsideCone { index, value });
    }
    Ok(())
}

pub(crate) fn check_interior_price(p: &[f64], tol: f64) -> Result<()> {
    if let Some((index, &value)) = p.iter().enumerate().find(|(_, &v)| !(v > tol) || !v.is_finite()) {
        return Err(Error::BoundaryPrice { index, value });
    }
    Ok(())
}

pub fn budget_contains(p: &[f64], x: &[f64], tol: f64) -> Result<bool> {
    check_dim(p.len(), x)?;
    check_price_cone(p)?;
    Ok(x.iter().all(|&xi| xi >= -tol) && dot(p, x) <= 1.0 + tol)
}

/// Euclidean projection of `y` onto `B(p)`.
///
/// The multiplier of the budget constraint is found exactly by sorting the
/// breakpoints of the piecewise-linear map `μ ↦ <p, (y - μ p)_+>`.
pub fn project_onto_budget(p: &[f64], y: &[f64], tol: f64) -> Result<Vec<f64>> {
    check_dim(p.len(), y)?;
    check_price_cone(p)?;
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::UnboundedProjection);
    }
    let clipped: Vec<f64> = y.iter().map(|&v| v.max(0.0)).collect();
    if dot(p, &clipped) <= 1.0 {
        return Ok(clipped);
    }
    // Coordinates with p_i > 0 and y_i > 0, by breakpoint y_i / p_i descending.
    let mut idx: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0 && y[i] > 0.0).collect();
    idx.sort_by(|&a, &b| (y[b] / p[b]).partial_cmp(&(y[a] / p[a])).unwrap_or(Ordering::Equal));
    let mut num = -1.0;
    let mut den = 0.0;
    let mut mu = 0.0;
    for (k, &i) in idx.iter().enumerate() {
        num += p[i] * y[i];
        den += p[i] * p[i];
        mu = num / den;
        let next = idx.get(k + 1).map(|&j| y[j] / p[j]).unwrap_or(0.0);
        if mu >= next {
            break;
        }
    }
    let x: Vec<f64> = (0..p.len())
        .map(|i| if p[i] > 0.0 { (y[i] - mu * p[i]).max(0.0) } else { y[i].max(0.0) })
        .collect();
    let residual = kkt_residual(p, y, &x, mu);
    if residual > tol.max(1e-12) * (1.0 + norm(y)) {
        return Err(Error::NonConvergence { iterations: idx.len(), residual });
    }
    Ok(x)
}

/// KKT residual of `x = argmin_{B(p)} |y - x|` with budget multiplier `mu`.
fn kkt_residual(p: &[f64], y: &[f64], x: &[f64], mu: f64) -> f64 {
    let feas = (dot(p, x) - 1.0).max(0.0);
    let stationarity = (0..p.len())
        .map(|i| {
            let g = x[i] - y[i] + mu * p[i];
            if x[i] > 0.0 {
                g.abs()
            } else {
                (-g).max(0.0)
            }
        })
        .fold(0.0, f64::max);
    feas.max(stationarity)
}

/// Solves `λ >= 0, x* + λ p̄ ∈ -N(x̄; R^n_+)` coordinate by coordinate.
///
/// Inactive coordinates give equalities `x*_i + λ p̄_i = 0`, active ones give
/// inequalities `x*_i + λ p̄_i >= 0`. Consistent equality ratios are averaged
/// and rejected when their spread exceeds `tol (1 + |λ|)`.
pub fn lambda_set(
    p_bar: &[f64],
    x_bar: &[f64],
    x_star: &[f64],
    d: &NormalConeDescriptor,
    tol: f64,
) -> Result<LambdaSet> {
    let n = p_bar.len();
    check_dim(n, x_bar)?;
    check_dim(n, x_star)?;
    check_dim(n, d.base_point())?;
    check_price_cone(p_bar)?;
    let band = AMBIGUITY_FACTOR * d.active_tol();
    for (i, (&xi, &active)) in x_bar.iter().zip(d.active()).enumerate() {
        if !active && xi <= band {
            return Err(Error::AmbiguousActiveSet { index: i, value: xi });
        }
    }

    let mut ratios: Vec<f64> = Vec::new();
    let mut lower = 0.0_f64;
    for i in 0..n {
        let (pi, xi) = (p_bar[i], x_star[i]);
        if d.active()[i] {
            if pi > tol {
                lower = lower.max(-xi / pi);
            } else if xi < -tol {
                return Ok(LambdaSet::Empty);
            }
        } else if pi > tol {
            ratios.push(-xi / pi);
        } else if xi.abs() > tol {
            return Ok(LambdaSet::Empty);
        }
    }

    if ratios.is_empty() {
        return Ok(LambdaSet::Ray { lo: lower });
    }
    let lambda = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    let slack = tol * (1.0 + lambda.abs());
    if hi - lo > slack || lambda < lower - slack {
        return Ok(LambdaSet::Empty);
    }
    Ok(LambdaSet::Singleton(lambda.max(0.0)))
}

fn normal_cone(x_bar: &[f64]) -> Result<NormalConeDescriptor> {
    normal_cone_at(&OrthantCone::new(x_bar.len())?, x_bar, DEFAULT_ACTIVE_TOL)
}

/// Classification of `<p̄, x̄>` against 1.
pub(crate) fn on_budget_line(p: &[f64], x: &[f64], tol: f64) -> bool {
    (dot(p, x) - 1.0).abs() <= tol
}

/// Checks the standing assumptions `p̄ ∈ int Y_+`, `x̄ ∈ B(p̄) \ {0}`.
pub(crate) fn check_graph_point(p_bar: &[f64], x_bar: &[f64], tol: f64) -> Result<()> {
    check_dim(p_bar.len(), x_bar)?;
    check_interior_price(p_bar, tol)?;
    if x_bar.iter().all(|v| v.abs() <= DEFAULT_ACTIVE_TOL) {
        return Err(Error::ZeroBundle);
    }
    if !budget_contains(p_bar, x_bar, tol)? {
        if let Some((index, &value)) = x_bar.iter().enumerate().find(|(_, &v)| v < -tol) {
            return Err(Error::OutsideCone { index, value });
        }
        return Err(Error::OutsideBudget { value: dot(p_bar, x_bar) });
    }
    Ok(())
}

/// Coderivative `D*B(p̄, x̄)(x*)` of the budget map.
pub fn coderivative_budget(p_bar: &[f64], x_bar: &[f64], x_star: &[f64], tol: f64) -> Result<Coderivative> {
    check_graph_point(p_bar, x_bar, tol)?;
    check_dim(p_bar.len(), x_star)?;
    let d = normal_cone(x_bar)?;
    let value = if on_budget_line(p_bar, x_bar, tol) {
        RaySegmentSet::segment(x_bar.to_vec(), lambda_set(p_bar, x_bar, x_star, &d, tol)?)
    } else {
        let neg: Vec<f64> = x_star.iter().map(|v| -v).collect();
        if normal_cone_contains(&d, &neg, tol)? {
            RaySegmentSet::ZeroSingleton
        } else {
            RaySegmentSet::Empty
        }
    };
    Ok(Coderivative { value })
}

/// Multiplier set `{ λ >= 0 : λ p̄ ∈ ∇u(x̄) - N(x̄; R^n_+) }` at a demand pair.
///
/// On the budget line this is `{<∇u(x̄), x̄>}`. Strictly inside the budget
/// the gradient must lie in the normal cone and `{0}` is returned. The
/// caller certifies `x̄ ∈ D(p̄)`; a stationarity residual is checked and a
/// failure reported as [`Error::NotDemandPair`].
pub fn kkt_multiplier(p_bar: &[f64], x_bar: &[f64], grad: &[f64], tol: f64) -> Result<LambdaSet> {
    check_graph_point(p_bar, x_bar, tol)?;
    check_dim(p_bar.len(), grad)?;
    let d = normal_cone(x_bar)?;
    let scale = 1.0 + norm(grad);
    if on_budget_line(p_bar, x_bar, tol) {
        let lambda = dot(grad, x_bar);
        if lambda < -tol * scale {
            return Err(Error::NotDemandPair(format!("<∇u, x̄> = {lambda} is negative")));
        }
        let lambda = lambda.max(0.0);
        let residual: Vec<f64> = grad.iter().zip(p_bar).map(|(g, p)| g - lambda * p).collect();
        if !normal_cone_contains(&d, &residual, tol.max(1e-9) * scale)? {
            return Err(Error::NotDemandPair(format!("∇u - λ p̄ = {residual:?} is not a normal to the orthant")));
        }
        Ok(LambdaSet::Singleton(lambda))
    } else if normal_cone_contains(&d, grad, tol.max(1e-9) * scale)? {
        Ok(LambdaSet::Singleton(0.0))
    } else {
        Err(Error::NotDemandPair(format!(
            "<p̄, x̄> < 1 but ∇u(x̄) = {grad:?} is not in N(x̄; R^n_+)"
        )))
    }
}

/// `sup { <ξ, q> : ξ ∈ s }` with `sup ∅ = -∞`.
pub fn support_function(s: &RaySegmentSet, q: &[f64]) -> Result<f64> {
    match s {
        RaySegmentSet::Empty => Ok(f64::NEG_INFINITY),
        RaySegmentSet::ZeroSingleton => Ok(0.0),
        RaySegmentSet::Union(segs) => {
            let mut best = f64::NEG_INFINITY;
            for seg in segs {
                check_dim(seg.base.len(), q)?;
                best = best.max(seg.lambdas.sup_scaled(dot(&seg.base, q)));
            }
            Ok(best)
        }
    }
}
