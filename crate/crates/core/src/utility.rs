//! Utility models: values, gradients, generalized subgradients and the
//! non-satiety scan.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cone::{normal_cone_at, normal_cone_contains, OrthantCone};
use crate::demand::{DemandResult, Maximizers};
use crate::vecops::{check_dim, dot};
use crate::{Error, Result, DEFAULT_ACTIVE_TOL};

/// Relative distance to a breakpoint below which a point counts as a kink.
const KINK_TOL: f64 = 1e-12;

pub type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A set of (upper or lower) subgradients of a utility at a point.
#[derive(Debug, Clone, PartialEq)]
pub enum SubgradientSet {
    Singleton(Vec<f64>),
    /// A closed interval of slopes; only produced for one-dimensional models.
    Interval1D { lo: f64, hi: f64 },
    Empty,
}

impl SubgradientSet {
    pub fn is_empty(&self) -> bool {
        matches!(self, SubgradientSet::Empty)
    }

    /// Extreme points of the set (one or two covectors).
    pub fn extreme_points(&self) -> Vec<Vec<f64>> {
        match self {
            SubgradientSet::Singleton(g) => vec![g.clone()],
            SubgradientSet::Interval1D { lo, hi } if lo == hi => vec![vec![*lo]],
            SubgradientSet::Interval1D { lo, hi } => vec![vec![*lo], vec![*hi]],
            SubgradientSet::Empty => Vec::new(),
        }
    }
}

/// Continuous piecewise-linear function of one variable.
///
/// `slopes[0]` applies left of the first breakpoint, `slopes[j]` between
/// breakpoints `j-1` and `j`, and the last slope right of the last breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    breakpoints: Vec<f64>,
    slopes: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<f64>, value_at_first: f64) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidModel("piecewise-linear model needs at least one breakpoint".into()));
        }
        if slopes.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidModel(format!(
                "expected {} slopes for {} breakpoints, got {}",
                breakpoints.len() + 1,
                breakpoints.len(),
                slopes.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidModel("breakpoints must be strictly increasing".into()));
        }
        if !breakpoints.iter().chain(&slopes).all(|v| v.is_finite()) || !value_at_first.is_finite() {
            return Err(Error::InvalidModel("non-finite piecewise-linear data".into()));
        }
        let mut values = Vec::with_capacity(breakpoints.len());
        values.push(value_at_first);
        for j in 1..breakpoints.len() {
            let prev = values[j - 1];
            values.push(prev + slopes[j] * (breakpoints[j] - breakpoints[j - 1]));
        }
        Ok(Self { breakpoints, slopes, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Values at the breakpoints.
    pub fn breakpoint_values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let b = &self.breakpoints;
        if x <= b[0] {
            return self.values[0] + self.slopes[0] * (x - b[0]);
        }
        // last breakpoint <= x
        let j = b.partition_point(|&bj| bj <= x) - 1;
        self.values[j] + self.slopes[j + 1] * (x - b[j])
    }

    /// Index of the breakpoint `x` sits on, if any.
    pub fn kink_at(&self, x: f64) -> Option<usize> {
        self.breakpoints.iter().position(|&b| (x - b).abs() <= KINK_TOL * (1.0 + b.abs()))
    }

    /// Slope of the piece containing `x` (valid off breakpoints).
    pub fn slope_at(&self, x: f64) -> f64 {
        self.slopes[self.breakpoints.partition_point(|&b| b <= x)]
    }

    pub fn is_concave(&self) -> bool {
        self.slopes.windows(2).all(|w| w[0] >= w[1])
    }
}

#[derive(Clone)]
pub struct CustomSmooth {
    dim: usize,
    value: ValueFn,
    gradient: GradientFn,
    concave: bool,
}

impl fmt::Debug for CustomSmooth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomSmooth").field("dim", &self.dim).field("concave", &self.concave).finish()
    }
}

#[derive(Debug, Clone)]
pub enum ModelKind {
    CobbDouglas { scale: f64, exponents: Vec<f64> },
    Linear { coefficients: Vec<f64> },
    PiecewiseLinear1D(PiecewiseLinear),
    CustomSmooth(CustomSmooth),
}

/// A utility function `u : R^n_+ -> R`.
#[derive(Debug, Clone)]
pub struct UtilityModel {
    kind: ModelKind,
}

impl UtilityModel {
    /// `u(x) = A * prod x_i^{a_i}` with `A > 0` and every `a_i` in `(0, 1)`.
    pub fn cobb_douglas(scale: f64, exponents: Vec<f64>) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidModel(format!("Cobb-Douglas scale must be positive, got {scale}")));
        }
        if exponents.is_empty() {
            return Err(Error::InvalidModel("Cobb-Douglas needs at least one exponent".into()));
        }
        if let Some(a) = exponents.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
            return Err(Error::InvalidModel(format!("Cobb-Douglas exponent {a} is outside (0, 1)")));
        }
        Ok(Self { kind: ModelKind::CobbDouglas { scale, exponents } })
    }

    pub fn linear(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidModel("linear model needs at least one coefficient".into()));
        }
        if coefficients.iter().any(|&c| !(c >= 0.0 && c.is_finite())) {
            return Err(Error::InvalidModel("linear coefficients must be finite and nonnegative".into()));
        }
        Ok(Self { kind: ModelKind::Linear { coefficients } })
    }

    pub fn piecewise_linear_1d(breakpoints: Vec<f64>, slopes: Vec<f64>, value_at_first: f64) -> Result<Self> {
        Ok(Self { kind: ModelKind::PiecewiseLinear1D(PiecewiseLinear::new(breakpoints, slopes, value_at_first)?) })
    }

    /// `u(x) = min(x, cap)` on the half-line.
    pub fn capped_identity(cap: f64) -> Result<Self> {
        if !(cap > 0.0) {
            return Err(Error::InvalidModel("cap must be positive".into()));
        }
        Self::piecewise_linear_1d(vec![cap], vec![1.0, 0.0], cap)
    }

    /// Registers a smooth model given by callbacks.
    ///
    /// The gradient is checked against central differences of the value at a
    /// fixed set of interior points, and a model declared concave must pass
    /// the sampled midpoint-concavity test.
    pub fn custom_smooth(dim: usize, value: ValueFn, gradient: GradientFn, concave: bool) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidModel("dimension must be at least 1".into()));
        }
        let model = Self { kind: ModelKind::CustomSmooth(CustomSmooth { dim, value, gradient, concave }) };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..20 {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.1..2.0)).collect();
            let g = model.gradient(&x)?;
            if g.len() != dim {
                return Err(Error::InvalidModel("gradient callback returned the wrong length".into()));
            }
            let fd = central_difference(&model, &x, 1e-6)?;
            let err = g.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = 1.0 + fd.iter().map(|v| v.abs()).fold(0.0, f64::max);
            if err > 1e-5 * scale {
                return Err(Error::InvalidModel(format!(
                    "gradient callback disagrees with finite differences at {x:?} (error {err:e})"
                )));
            }
        }
        if concave {
            if let Some((x, y)) = midpoint_concavity_violation(&model, 500, 4.0, 0xc0ca)? {
                return Err(Error::InvalidModel(format!("model declared concave fails the midpoint test at {x:?}, {y:?}")));
            }
        }
        Ok(model)
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ModelKind::CobbDouglas { exponents, .. } => exponents.len(),
            ModelKind::Linear { coefficients } => coefficients.len(),
            ModelKind::PiecewiseLinear1D(_) => 1,
            ModelKind::CustomSmooth(c) => c.dim,
        }
    }

    pub fn is_concave(&self) -> bool {
        match &self.kind {
            ModelKind::CobbDouglas { exponents, .. } => exponents.iter().sum::<f64>() <= 1.0,
            ModelKind::Linear { .. } => true,
            ModelKind::PiecewiseLinear1D(pl) => pl.is_concave(),
            ModelKind::CustomSmooth(c) => c.concave,
        }
    }

    /// Strictly increasing in every coordinate on the interior of the orthant.
    pub fn is_strictly_monotone(&self) -> bool {
        match &self.kind {
            ModelKind::CobbDouglas { .. } => true,
            ModelKind::Linear { coefficients } => coefficients.iter().all(|&c| c > 0.0),
            ModelKind::PiecewiseLinear1D(pl) => pl.slopes().iter().all(|&s| s > 0.0),
            ModelKind::CustomSmooth(_) => false,
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x)?;
        if let Some((index, &value)) = x.iter().enumerate().find(|(_, &v)| !(v >= -DEFAULT_ACTIVE_TOL)) {
            return Err(Error::OutsideCone { index, value });
        }
        Ok(())
    }

    /// `u(x)` for `x` in the orthant, with the convention `0^a = 0`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(match &self.kind {
            ModelKind::CobbDouglas { scale, exponents } => {
                if x.iter().any(|&xi| xi <= 0.0) {
                    0.0
                } else {
                    scale * x.iter().zip(exponents).map(|(xi, a)| xi.powf(*a)).product::<f64>()
                }
            }
            ModelKind::Linear { coefficients } => dot(coefficients, x),
            ModelKind::PiecewiseLinear1D(pl) => pl.eval(x[0]),
            ModelKind::CustomSmooth(c) => (c.value)(x),
        })
    }

    /// True when `u` is (strictly) differentiable at `x`.
    pub fn is_differentiable_at(&self, x: &[f64]) -> bool {
        match &self.kind {
            ModelKind::CobbDouglas { .. } => x.iter().all(|&xi| xi > 0.0),
            ModelKind::Linear { .. } | ModelKind::CustomSmooth(_) => true,
            ModelKind::PiecewiseLinear1D(pl) => match pl.kink_at(x[0]) {
                None => true,
                Some(j) => pl.slopes[j] == pl.slopes[j + 1],
            },
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        match &self.kind {
            ModelKind::CobbDouglas { scale, exponents } => {
                if let Some(i) = x.iter().position(|&xi| xi <= 0.0) {
                    return Err(Error::NotDifferentiable(format!(
                        "Cobb-Douglas at boundary point (coordinate {i} is zero)"
                    )));
                }
                let u = scale * x.iter().zip(exponents).map(|(xi, a)| xi.powf(*a)).product::<f64>();
                Ok(x.iter().zip(exponents).map(|(xi, a)| a * u / xi).collect())
            }
            ModelKind::Linear { coefficients } => Ok(coefficients.clone()),
            ModelKind::PiecewiseLinear1D(pl) => match pl.kink_at(x[0]) {
                Some(j) if pl.slopes[j] != pl.slopes[j + 1] => Err(Error::NotDifferentiable(format!(
                    "piecewise-linear kink at {}",
                    pl.breakpoints[j]
                ))),
                Some(j) => Ok(vec![pl.slopes[j]]),
                None => Ok(vec![pl.slope_at(x[0])]),
            },
            ModelKind::CustomSmooth(c) => Ok((c.gradient)(x)),
        }
    }

    /// Limiting upper subdifferential `∂⁺u(x̄)`.
    ///
    /// Singleton gradient at differentiability points. At a kink of a
    /// concave piecewise-linear model this is the superdifferential interval
    /// between the adjacent slopes. Nonsmooth points of non-concave models
    /// and boundary points of Cobb-Douglas are rejected.
    pub fn upper_subdifferential(&self, x: &[f64]) -> Result<SubgradientSet> {
        self.check_point(x)?;
        if let ModelKind::PiecewiseLinear1D(pl) = &self.kind {
            if let Some(j) = pl.kink_at(x[0]) {
                let (left, right) = (pl.slopes[j], pl.slopes[j + 1]);
                if left == right {
                    return Ok(SubgradientSet::Singleton(vec![left]));
                }
                if left > right {
                    return Ok(SubgradientSet::Interval1D { lo: right, hi: left });
                }
                return Err(Error::Unsupported(format!(
                    "upper subdifferential at a convex kink ({} < {})",
                    left, right
                )));
            }
        }
        match self.gradient(x) {
            Ok(g) => Ok(SubgradientSet::Singleton(g)),
            Err(Error::NotDifferentiable(msg)) => Err(Error::Unsupported(msg)),
            Err(e) => Err(e),
        }
    }

    /// Fréchet (lower) subdifferential `∂̂u(x̄)`.
    ///
    /// Empty at a concave kink; the slope interval at a convex kink.
    pub fn lower_frechet_subdifferential(&self, x: &[f64]) -> Result<SubgradientSet> {
        self.check_point(x)?;
        if let ModelKind::PiecewiseLinear1D(pl) = &self.kind {
            if let Some(j) = pl.kink_at(x[0]) {
                let (left, right) = (pl.slopes[j], pl.slopes[j + 1]);
                return Ok(if left == right {
                    SubgradientSet::Singleton(vec![left])
                } else if left < right {
                    SubgradientSet::Interval1D { lo: left, hi: right }
                } else {
                    SubgradientSet::Empty
                });
            }
        }
        match self.gradient(x) {
            Ok(g) => Ok(SubgradientSet::Singleton(g)),
            Err(Error::NotDifferentiable(msg)) => Err(Error::Unsupported(msg)),
            Err(e) => Err(e),
        }
    }

    /// Singular upper subdifferential `∂^{∞,+}u(x̄)`, which is `{0}` wherever
    /// the model is locally Lipschitz.
    pub fn singular_upper_subdifferential(&self, x: &[f64]) -> Result<SubgradientSet> {
        self.check_point(x)?;
        let lipschitz = match &self.kind {
            ModelKind::CobbDouglas { .. } => x.iter().all(|&xi| xi > 0.0),
            ModelKind::Linear { .. } | ModelKind::PiecewiseLinear1D(_) | ModelKind::CustomSmooth(_) => true,
        };
        if !lipschitz {
            return Err(Error::Unsupported("model is not locally Lipschitz at this point".into()));
        }
        Ok(SubgradientSet::Singleton(vec![0.0; self.dim()]))
    }
}

/// Central differences of `u` with relative step `h`.
pub fn central_difference(u: &UtilityModel, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let step = h * x[i].abs().max(1.0);
        probe[i] = x[i] + step;
        let up = u.value(&probe)?;
        probe[i] = x[i] - step;
        let down = u.value(&probe)?;
        probe[i] = x[i];
        out.push((up - down) / (2.0 * step));
    }
    Ok(out)
}

/// Samples `pairs` random pairs in `[0, side]^n` and returns the first pair
/// violating `u((x+y)/2) >= (u(x)+u(y))/2 - 1e-12`.
pub fn midpoint_concavity_violation(
    u: &UtilityModel,
    pairs: usize,
    side: f64,
    seed: u64,
) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = u.dim();
    for _ in 0..pairs {
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..side)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..side)).collect();
        let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        if u.value(&mid)? < 0.5 * (u.value(&x)? + u.value(&y)?) - 1e-12 {
            return Ok(Some((x, y)));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NscViolation {
    pub price: Vec<f64>,
    pub point: Vec<f64>,
    /// `<p, x̄>` at the offending demand point.
    pub budget_value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NscReport {
    pub prices_checked: usize,
    pub points_checked: usize,
    pub violations: Vec<NscViolation>,
}

impl NscReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Scans sampled prices and reports demand points that do not saturate the
/// budget, i.e. `|<p, x̄> - 1| > tol`.
pub fn check_nsc<F>(u: &UtilityModel, prices: &[Vec<f64>], mut demand_oracle: F, tol: f64) -> Result<NscReport>
where
    F: FnMut(&UtilityModel, &[f64]) -> Result<DemandResult>,
{
    let mut report = NscReport::default();
    for p in prices {
        check_dim(u.dim(), p)?;
        if let Some((index, &value)) = p.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(Error::BoundaryPrice { index, value });
        }
        let result = demand_oracle(u, p)?;
        report.prices_checked += 1;
        let points: Vec<Vec<f64>> = match &result.maximizers {
            Maximizers::Points(pts) => pts.clone(),
            Maximizers::Interval1D { lo, hi } => vec![vec![*lo], vec![*hi]],
        };
        for x in points {
            report.points_checked += 1;
            let budget_value = dot(p, &x);
            if !((budget_value - 1.0).abs() <= tol) {
                report.violations.push(NscViolation { price: p.clone(), point: x, budget_value });
            }
        }
    }
    Ok(report)
}

/// True when `g ∈ N(x̄; R^n_+)`.
pub(crate) fn in_normal_cone(x: &[f64], g: &[f64], tol: f64) -> Result<bool> {
    let cone = OrthantCone::new(x.len())?;
    let d = normal_cone_at(&cone, x, DEFAULT_ACTIVE_TOL)?;
    normal_cone_contains(&d, g, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cd_half() -> UtilityModel {
        UtilityModel::cobb_douglas(1.0, vec![0.5, 0.5]).unwrap()
    }

    fn kinked() -> UtilityModel {
        UtilityModel::capped_identity(1.0).unwrap()
    }

    #[test]
    fn values() {
        assert!((cd_half().value(&[0.5, 0.5]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(kinked().value(&[2.0]).unwrap(), 1.0);
        assert!((kinked().value(&[0.3]).unwrap() - 0.3).abs() < 1e-15);
        let cd = UtilityModel::cobb_douglas(3.7, vec![0.2, 0.9, 0.4]).unwrap();
        assert_eq!(cd.value(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(cd.value(&[1.0, 0.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn value_rejects_bad_points() {
        assert!(matches!(cd_half().value(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(cd_half().value(&[1.0, -0.1]), Err(Error::OutsideCone { index: 1, .. })));
    }

    #[test]
    fn gradients() {
        let g = cd_half().gradient(&[0.5, 0.5]).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-15 && (g[1] - 0.5).abs() < 1e-15);
        assert_eq!(kinked().gradient(&[0.5]).unwrap(), vec![1.0]);
        assert_eq!(kinked().gradient(&[1.5]).unwrap(), vec![0.0]);
        let lin = UtilityModel::linear(vec![1.0, 2.0]).unwrap();
        assert_eq!(lin.gradient(&[3.0, 0.0]).unwrap(), vec![1.0, 2.0]);
        assert!(matches!(kinked().gradient(&[1.0]), Err(Error::NotDifferentiable(_))));
        assert!(matches!(cd_half().gradient(&[0.0, 1.0]), Err(Error::NotDifferentiable(_))));
    }

    #[test]
    fn upper_subdifferentials() {
        assert_eq!(kinked().upper_subdifferential(&[1.0]).unwrap(), SubgradientSet::Interval1D { lo: 0.0, hi: 1.0 });
        assert_eq!(kinked().upper_subdifferential(&[0.5]).unwrap(), SubgradientSet::Singleton(vec![1.0]));
        let s = cd_half().upper_subdifferential(&[0.5, 0.5]).unwrap();
        assert_eq!(s, SubgradientSet::Singleton(cd_half().gradient(&[0.5, 0.5]).unwrap()));
        let lin = UtilityModel::linear(vec![0.3, 0.0]).unwrap();
        assert_eq!(lin.upper_subdifferential(&[0.0, 7.0]).unwrap(), SubgradientSet::Singleton(vec![0.3, 0.0]));
        assert!(cd_half().upper_subdifferential(&[0.0, 1.0]).is_err());

        let convex = UtilityModel::piecewise_linear_1d(vec![1.0], vec![0.5, 2.0], 0.5).unwrap();
        assert!(matches!(convex.upper_subdifferential(&[1.0]), Err(Error::Unsupported(_))));
        assert_eq!(
            convex.lower_frechet_subdifferential(&[1.0]).unwrap(),
            SubgradientSet::Interval1D { lo: 0.5, hi: 2.0 }
        );
        assert_eq!(kinked().lower_frechet_subdifferential(&[1.0]).unwrap(), SubgradientSet::Empty);
    }

    #[test]
    fn singular_upper_subdifferentials() {
        assert_eq!(kinked().singular_upper_subdifferential(&[1.0]).unwrap(), SubgradientSet::Singleton(vec![0.0]));
        let lin = UtilityModel::linear(vec![1.0, 1.0]).unwrap();
        assert_eq!(lin.singular_upper_subdifferential(&[0.0, 0.0]).unwrap(), SubgradientSet::Singleton(vec![0.0, 0.0]));
        assert_eq!(
            cd_half().singular_upper_subdifferential(&[0.2, 3.0]).unwrap(),
            SubgradientSet::Singleton(vec![0.0, 0.0])
        );
        assert!(cd_half().singular_upper_subdifferential(&[0.0, 3.0]).is_err());
    }

    #[test]
    fn model_validation() {
        assert!(UtilityModel::cobb_douglas(0.0, vec![0.5]).is_err());
        assert!(UtilityModel::cobb_douglas(1.0, vec![1.0]).is_err());
        assert!(UtilityModel::cobb_douglas(1.0, vec![]).is_err());
        assert!(UtilityModel::linear(vec![-1.0]).is_err());
        assert!(UtilityModel::piecewise_linear_1d(vec![1.0, 1.0], vec![1.0, 0.5, 0.0], 0.0).is_err());
        assert!(UtilityModel::piecewise_linear_1d(vec![1.0], vec![1.0], 0.0).is_err());
    }

    #[test]
    fn piecewise_linear_is_continuous() {
        let pl = PiecewiseLinear::new(vec![1.0, 2.0, 4.0], vec![3.0, 1.0, 0.5, -1.0], 2.0).unwrap();
        for &b in pl.breakpoints() {
            let l = pl.eval(b - 1e-12);
            let r = pl.eval(b + 1e-12);
            assert!((l - r).abs() < 1e-10);
        }
        assert_eq!(pl.eval(0.0), -1.0);
        assert_eq!(pl.eval(2.0), 3.0);
        assert_eq!(pl.eval(5.0), 3.0 + 1.0 - 1.0);
        assert!(pl.is_concave());
    }

    #[test]
    fn custom_smooth_registration() {
        let value: ValueFn = Arc::new(|x: &[f64]| x.iter().map(|v| (1.0 + v).ln()).sum());
        let grad: GradientFn = Arc::new(|x: &[f64]| x.iter().map(|v| 1.0 / (1.0 + v)).collect());
        let u = UtilityModel::custom_smooth(2, value.clone(), grad, true).unwrap();
        assert!(u.is_concave());

        let wrong: GradientFn = Arc::new(|x: &[f64]| x.iter().map(|_| 1.0).collect());
        assert!(matches!(UtilityModel::custom_smooth(2, value, wrong, true), Err(Error::InvalidModel(_))));

        let convex_value: ValueFn = Arc::new(|x: &[f64]| x.iter().map(|v| v * v).sum());
        let convex_grad: GradientFn = Arc::new(|x: &[f64]| x.iter().map(|v| 2.0 * v).collect());
        assert!(UtilityModel::custom_smooth(2, convex_value.clone(), convex_grad.clone(), true).is_err());
        assert!(UtilityModel::custom_smooth(2, convex_value, convex_grad, false).is_ok());
    }

    #[test]
    fn concavity_flags() {
        assert!(cd_half().is_concave());
        assert!(!UtilityModel::cobb_douglas(1.0, vec![0.7, 0.7]).unwrap().is_concave());
        assert!(kinked().is_concave());
        for u in [cd_half(), kinked(), UtilityModel::linear(vec![1.0, 2.0]).unwrap()] {
            assert_eq!(midpoint_concavity_violation(&u, 500, 4.0, 1).unwrap(), None);
        }
        let non_concave = UtilityModel::cobb_douglas(1.0, vec![0.9, 0.9]).unwrap();
        assert!(midpoint_concavity_violation(&non_concave, 500, 4.0, 1).unwrap().is_some());
    }
}
