//! Solvers for the consumer problem `max { u(x) : x ∈ B(p) }`, returning the
//! indirect utility `v(p)` and a representation of the demand set `D(p)`.

use crate::budget::{check_interior_price, project_onto_budget};
use crate::utility::{ModelKind, PiecewiseLinear, UtilityModel};
use crate::vecops::{axpy, check_dim, dot, sub};
use crate::{Error, Result};

/// Maximizer set representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Maximizers {
    Points(Vec<Vec<f64>>),
    /// A segment of maximizers on the line; `hi` may be `+∞` for a zero price.
    Interval1D { lo: f64, hi: f64 },
}

impl Maximizers {
    /// Representative demand points: the listed points, or the endpoints and
    /// `interior` evenly spaced points of a bounded segment.
    pub fn sample_points(&self, interior: usize) -> Vec<Vec<f64>> {
        match self {
            Maximizers::Points(pts) => pts.clone(),
            Maximizers::Interval1D { lo, hi } if !hi.is_finite() => vec![vec![*lo]],
            Maximizers::Interval1D { lo, hi } => {
                let mut pts = vec![vec![*lo]];
                for k in 1..=interior {
                    pts.push(vec![lo + (hi - lo) * k as f64 / (interior + 1) as f64]);
                }
                pts.push(vec![*hi]);
                pts
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    ClosedForm,
    ProjectedGradient,
    Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemandResult {
    pub maximizers: Maximizers,
    /// `v(p)`.
    pub value: f64,
    pub method: SolveMethod,
    /// Projected-gradient residual, budget residual, or grid spacing.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Projected-gradient stationarity tolerance.
    pub tol: f64,
    pub max_iters: usize,
    /// Armijo constant of the backtracking line search.
    pub armijo: f64,
    pub grid_step: f64,
    /// Grid ties are values within `grid_value_tol * (1 + |v|)` of the maximum.
    pub grid_value_tol: f64,
    pub grid_cap: u64,
    /// Relative disagreement above which cross-checked solvers report
    /// indeterminacy.
    pub cross_check_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iters: 200_000,
            armijo: 1e-4,
            grid_step: 1e-3,
            grid_value_tol: 1e-9,
            grid_cap: 20_000_000,
            cross_check_tol: 1e-3,
        }
    }
}

/// Closed-form Cobb-Douglas demand `x_i = (a_i / Σ a_j) / p_i`.
pub fn demand_closed_form(u: &UtilityModel, p: &[f64]) -> Result<DemandResult> {
    let ModelKind::CobbDouglas { exponents, .. } = u.kind() else {
        return Err(Error::Unsupported("closed-form demand is only available for Cobb-Douglas".into()));
    };
    check_dim(exponents.len(), p)?;
    check_interior_price(p, 0.0)?;
    let total: f64 = exponents.iter().sum();
    let x: Vec<f64> = exponents.iter().zip(p).map(|(a, pi)| a / total / pi).collect();
    let value = u.value(&x)?;
    let residual = (dot(p, &x) - 1.0).abs();
    Ok(DemandResult { maximizers: Maximizers::Points(vec![x]), value, method: SolveMethod::ClosedForm, residual })
}

/// Exact demand of a one-dimensional piecewise-linear model, including the
/// zero price where the budget set is the whole half-line.
pub fn demand_piecewise_linear(pl: &PiecewiseLinear, price: f64) -> Result<DemandResult> {
    if !(price >= 0.0) || !price.is_finite() {
        return Err(Error::OutsideCone { index: 0, value: price });
    }
    let upper = if price > 0.0 { 1.0 / price } else { f64::INFINITY };
    let last_slope = *pl.slopes().last().unwrap();
    if upper.is_infinite() && last_slope > 0.0 {
        return Err(Error::UnboundedUtility);
    }
    let mut cands = vec![0.0];
    cands.extend(pl.breakpoints().iter().copied().filter(|&b| b > 0.0 && b < upper));
    if upper.is_finite() {
        cands.push(upper);
    }
    let values: Vec<f64> = cands.iter().map(|&c| pl.eval(c)).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tie = 1e-12 * (1.0 + best.abs());
    let tied: Vec<bool> = values.iter().map(|&v| v >= best - tie).collect();
    let flat_tail = upper.is_infinite() && last_slope == 0.0 && *tied.last().unwrap();

    // Runs of consecutive tied candidates; u is affine between candidates.
    let mut runs: Vec<(f64, f64)> = Vec::new();
    let mut k = 0;
    while k < cands.len() {
        if !tied[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 < cands.len() && tied[k + 1] {
            k += 1;
        }
        let end = if k == cands.len() - 1 && flat_tail { f64::INFINITY } else { cands[k] };
        runs.push((cands[start], end));
        k += 1;
    }
    let maximizers = if runs.len() == 1 && runs[0].0 < runs[0].1 {
        Maximizers::Interval1D { lo: runs[0].0, hi: runs[0].1 }
    } else if runs.iter().all(|(a, b)| a == b) {
        Maximizers::Points(runs.iter().map(|(a, _)| vec![*a]).collect())
    } else {
        return Err(Error::Indeterminate("demand has both isolated points and segments".into()));
    };
    Ok(DemandResult { maximizers, value: best, method: SolveMethod::ClosedForm, residual: 0.0 })
}

/// Projected gradient ascent with backtracking halving from a unit step.
pub fn demand_projected_gradient(u: &UtilityModel, p: &[f64], cfg: &SolverConfig) -> Result<DemandResult> {
    check_dim(u.dim(), p)?;
    check_interior_price(p, 0.0)?;
    if !u.is_concave() {
        return Err(Error::Unsupported("projected gradient requires a concave model".into()));
    }
    let n = p.len() as f64;
    let mut x: Vec<f64> = p.iter().map(|pi| 0.5 / (n * pi)).collect();
    let mut fx = u.value(&x)?;
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iters {
        let g = u.gradient(&x)?;
        let full = project_onto_budget(p, &axpy(1.0, &g, &x), 1e-12)?;
        residual = sub(&full, &x).iter().map(|v| v.abs()).fold(0.0, f64::max);
        if residual <= cfg.tol {
            return Ok(DemandResult {
                maximizers: Maximizers::Points(vec![x]),
                value: fx,
                method: SolveMethod::ProjectedGradient,
                residual,
            });
        }
        let mut t = 1.0;
        loop {
            let y = if t == 1.0 {
                full.clone()
            } else {
                project_onto_budget(p, &axpy(t, &g, &x), 1e-12)?
            };
            let fy = u.value(&y)?;
            if fy >= fx + cfg.armijo * dot(&g, &sub(&y, &x)) {
                x = y;
                fx = fy;
                break;
            }
            t *= 0.5;
            if t < 1e-30 {
                return Err(Error::NonConvergence { iterations: cfg.max_iters, residual });
            }
        }
    }
    Err(Error::NonConvergence { iterations: cfg.max_iters, residual })
}

/// Brute-force grid maximization over `B(p)` for `n <= 3`.
///
/// Ties are points within `value_tol * (1 + |max|)` of the grid maximum. In
/// one dimension a single run of adjacent ties is merged into an interval.
pub fn demand_grid(u: &UtilityModel, p: &[f64], step: f64, value_tol: f64) -> Result<DemandResult> {
    demand_grid_boxed(u, p, step, value_tol, None, SolverConfig::default().grid_cap)
}

/// [`demand_grid`] with an explicit box bound for zero price coordinates.
pub fn demand_grid_boxed(
    u: &UtilityModel,
    p: &[f64],
    step: f64,
    value_tol: f64,
    box_upper: Option<f64>,
    cap: u64,
) -> Result<DemandResult> {
    let n = u.dim();
    check_dim(n, p)?;
    if n > 3 {
        return Err(Error::Unsupported("grid demand solver supports at most 3 goods".into()));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidParameter("grid step must be positive".into()));
    }
    let upper: Vec<f64> = p
        .iter()
        .enumerate()
        .map(|(i, &pi)| {
            if pi > 0.0 {
                Ok(match box_upper {
                    Some(b) => (1.0 / pi).min(b),
                    None => 1.0 / pi,
                })
            } else if pi == 0.0 {
                box_upper.ok_or(Error::BoundaryPrice { index: i, value: pi })
            } else {
                Err(Error::OutsideCone { index: i, value: pi })
            }
        })
        .collect::<Result<_>>()?;

    let estimate: f64 = upper.iter().map(|b| b / step + 2.0).product::<f64>() / (1..=n).product::<usize>() as f64;
    if estimate > cap as f64 {
        return Err(Error::GridTooLarge { points: estimate as u64, cap });
    }

    let mut best = f64::NEG_INFINITY;
    let mut scored: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut visit = |x: Vec<f64>| -> Result<()> {
        let v = u.value(&x)?;
        best = best.max(v);
        scored.push((x, v));
        Ok(())
    };

    if n == 1 {
        let count = (upper[0] / step).ceil().max(1.0) as usize;
        for k in 0..=count {
            visit(vec![upper[0] * k as f64 / count as f64])?;
        }
    } else {
        enumerate_budget(p, &upper, step, &mut Vec::with_capacity(n), 1.0, &mut visit)?;
    }

    let tie = value_tol * (1.0 + best.abs());
    let winners: Vec<Vec<f64>> = scored.into_iter().filter(|(_, v)| *v >= best - tie).map(|(x, _)| x).collect();
    let maximizers = if n == 1 && winners.len() > 1 {
        let count = (upper[0] / step).ceil().max(1.0);
        let spacing = upper[0] / count;
        let contiguous = winners.windows(2).all(|w| (w[1][0] - w[0][0]) <= spacing * (1.0 + 1e-9));
        if contiguous {
            Maximizers::Interval1D { lo: winners[0][0], hi: winners[winners.len() - 1][0] }
        } else {
            Maximizers::Points(winners)
        }
    } else {
        Maximizers::Points(winners)
    };
    Ok(DemandResult { maximizers, value: best, method: SolveMethod::Grid, residual: step })
}

/// Lattice points of `B(p)` with step `step`, plus the budget-boundary point
/// of the last coordinate on every line.
fn enumerate_budget<F>(p: &[f64], upper: &[f64], step: f64, prefix: &mut Vec<f64>, remaining: f64, visit: &mut F) -> Result<()>
where
    F: FnMut(Vec<f64>) -> Result<()>,
{
    let i = prefix.len();
    let bound = if p[i] > 0.0 { (remaining.max(0.0) / p[i]).min(upper[i]) } else { upper[i] };
    let count = (bound / step).floor() as usize;
    let last = i + 1 == p.len();
    for k in 0..=count {
        let xi = k as f64 * step;
        prefix.push(xi);
        if last {
            visit(prefix.clone())?;
        } else {
            enumerate_budget(p, upper, step, prefix, remaining - p[i] * xi, visit)?;
        }
        prefix.pop();
    }
    if last && bound - count as f64 * step > 1e-12 {
        prefix.push(bound);
        visit(prefix.clone())?;
        prefix.pop();
    }
    Ok(())
}

/// Picks the most reliable solver for the model.
pub fn demand(u: &UtilityModel, p: &[f64], cfg: &SolverConfig) -> Result<DemandResult> {
    check_dim(u.dim(), p)?;
    match u.kind() {
        ModelKind::CobbDouglas { .. } => demand_closed_form(u, p),
        ModelKind::PiecewiseLinear1D(pl) => demand_piecewise_linear(pl, p[0]),
        _ if u.is_concave() => demand_projected_gradient(u, p, cfg),
        _ if u.dim() <= 3 => {
            check_interior_price(p, 0.0)?;
            demand_grid(u, p, cfg.grid_step, cfg.grid_value_tol)
        }
        _ => Err(Error::Unsupported("global maximization of a non-concave model in more than 3 goods".into())),
    }
}

/// Runs [`demand`] and, for `n <= 3`, the grid solver; reports
/// [`Error::Indeterminate`] when their values disagree beyond
/// `cfg.cross_check_tol * (1 + |v|)`.
pub fn cross_checked_demand(u: &UtilityModel, p: &[f64], cfg: &SolverConfig) -> Result<DemandResult> {
    let primary = demand(u, p, cfg)?;
    if u.dim() > 3 || primary.method == SolveMethod::Grid {
        return Ok(primary);
    }
    let grid = demand_grid(u, p, cfg.grid_step, cfg.grid_value_tol)?;
    if (grid.value - primary.value).abs() > cfg.cross_check_tol * (1.0 + primary.value.abs()) {
        return Err(Error::Indeterminate(format!(
            "solver value {} disagrees with grid value {}",
            primary.value, grid.value
        )));
    }
    Ok(primary)
}

/// `v(p) = sup { u(x) : x ∈ B(p) }`.
pub fn indirect_utility(u: &UtilityModel, p: &[f64], cfg: &SolverConfig) -> Result<f64> {
    Ok(demand(u, p, cfg)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::budget_contains;

    fn cd_half() -> UtilityModel {
        UtilityModel::cobb_douglas(1.0, vec![0.5, 0.5]).unwrap()
    }

    fn kinked() -> UtilityModel {
        UtilityModel::capped_identity(1.0).unwrap()
    }

    fn single_point(r: &DemandResult) -> &[f64] {
        match &r.maximizers {
            Maximizers::Points(p) if p.len() == 1 => &p[0],
            other => panic!("expected one point, got {other:?}"),
        }
    }

    #[test]
    fn closed_form_examples() {
        let r = demand_closed_form(&cd_half(), &[1.0, 1.0]).unwrap();
        assert_eq!(single_point(&r), &[0.5, 0.5]);
        assert!((r.value - 0.5).abs() < 1e-15);
        let r = demand_closed_form(&cd_half(), &[2.0, 2.0]).unwrap();
        assert_eq!(single_point(&r), &[0.25, 0.25]);
        assert!((r.value - 0.25).abs() < 1e-15);
        let u = UtilityModel::cobb_douglas(1.0, vec![0.25; 4]).unwrap();
        let r = demand_closed_form(&u, &[1.0; 4]).unwrap();
        assert_eq!(single_point(&r), &[0.25; 4]);
        assert!(matches!(demand_closed_form(&cd_half(), &[1.0, 0.0]), Err(Error::BoundaryPrice { .. })));
        assert!(demand_closed_form(&kinked(), &[1.0]).is_err());
    }

    #[test]
    fn closed_form_agrees_with_grid() {
        let u = cd_half();
        for p in [[1.0, 1.0], [2.0, 2.0]] {
            let cf = demand_closed_form(&u, &p).unwrap();
            let g = demand_grid(&u, &p, 1e-3, 1e-9).unwrap();
            assert!((cf.value - g.value).abs() < 1e-3 * (1.0 + cf.value), "{} vs {}", cf.value, g.value);
        }
    }

    #[test]
    fn projected_gradient_examples() {
        let cfg = SolverConfig::default();
        let r = demand_projected_gradient(&cd_half(), &[1.0, 1.0], &cfg).unwrap();
        let x = single_point(&r);
        assert!((x[0] - 0.5).abs() < 1e-6 && (x[1] - 0.5).abs() < 1e-6, "{x:?}");
        assert!((r.value - 0.5).abs() < 1e-6);

        let lin = UtilityModel::linear(vec![1.0, 2.0]).unwrap();
        let r = demand_projected_gradient(&lin, &[1.0, 1.0], &cfg).unwrap();
        let x = single_point(&r);
        assert!(x[0].abs() < 1e-9 && (x[1] - 1.0).abs() < 1e-9);
        assert!((r.value - 2.0).abs() < 1e-9);
        let g = demand_grid(&lin, &[1.0, 1.0], 1e-3, 1e-9).unwrap();
        assert!((g.value - 2.0).abs() < 1e-12);

        let tie = UtilityModel::linear(vec![1.0, 1.0]).unwrap();
        let r = demand_projected_gradient(&tie, &[1.0, 1.0], &cfg).unwrap();
        let x = single_point(&r);
        assert!((x[0] + x[1] - 1.0).abs() < 1e-9);
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn projected_gradient_rejects_non_concave() {
        let u = UtilityModel::cobb_douglas(1.0, vec![0.8, 0.8]).unwrap();
        assert!(matches!(
            demand_projected_gradient(&u, &[1.0, 1.0], &SolverConfig::default()),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn projected_gradient_nonconvergence() {
        let cfg = SolverConfig { max_iters: 2, tol: 0.0, ..SolverConfig::default() };
        assert!(matches!(
            demand_projected_gradient(&cd_half(), &[1.0, 3.0], &cfg),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn grid_examples_for_kinked_utility() {
        let r = demand_grid(&kinked(), &[0.5], 1e-3, 1e-9).unwrap();
        assert_eq!(r.maximizers, Maximizers::Interval1D { lo: 1.0, hi: 2.0 });
        assert_eq!(r.value, 1.0);
        let r = demand_grid(&kinked(), &[2.0], 1e-3, 1e-9).unwrap();
        assert_eq!(r.maximizers, Maximizers::Points(vec![vec![0.5]]));
        assert_eq!(r.value, 0.5);
        assert!(matches!(demand_grid(&kinked(), &[0.0], 1e-3, 1e-9), Err(Error::BoundaryPrice { .. })));
        let r = demand_grid_boxed(&kinked(), &[0.0], 1e-3, 1e-9, Some(3.0), 1_000_000).unwrap();
        assert_eq!(r.maximizers, Maximizers::Interval1D { lo: 1.0, hi: 3.0 });
    }

    #[test]
    fn grid_cap() {
        let u = UtilityModel::cobb_douglas(1.0, vec![0.3, 0.3, 0.3]).unwrap();
        assert!(matches!(demand_grid(&u, &[1.0, 1.0, 1.0], 1e-3, 1e-9), Err(Error::GridTooLarge { .. })));
        assert!(demand_grid(&UtilityModel::linear(vec![1.0; 4]).unwrap(), &[1.0; 4], 0.1, 1e-9).is_err());
    }

    #[test]
    fn exact_piecewise_linear_demand() {
        let u = kinked();
        let r = demand(&u, &[0.5], &SolverConfig::default()).unwrap();
        assert_eq!(r.maximizers, Maximizers::Interval1D { lo: 1.0, hi: 2.0 });
        assert_eq!(r.value, 1.0);
        let r = demand(&u, &[2.0], &SolverConfig::default()).unwrap();
        assert_eq!(r.maximizers, Maximizers::Points(vec![vec![0.5]]));
        assert_eq!(r.value, 0.5);
        let r = demand(&u, &[1.0], &SolverConfig::default()).unwrap();
        assert_eq!(r.maximizers, Maximizers::Points(vec![vec![1.0]]));
        assert_eq!(r.value, 1.0);
        let r = demand(&u, &[0.0], &SolverConfig::default()).unwrap();
        assert_eq!(r.maximizers, Maximizers::Interval1D { lo: 1.0, hi: f64::INFINITY });
        assert_eq!(r.value, 1.0);

        let rising = UtilityModel::piecewise_linear_1d(vec![1.0], vec![1.0, 0.5], 1.0).unwrap();
        assert_eq!(demand(&rising, &[0.0], &SolverConfig::default()), Err(Error::UnboundedUtility));
    }

    #[test]
    fn indirect_utility_examples() {
        let cfg = SolverConfig::default();
        assert!((indirect_utility(&cd_half(), &[1.0, 1.0], &cfg).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(indirect_utility(&kinked(), &[1.0], &cfg).unwrap(), 1.0);
        let mut prev = f64::INFINITY;
        for t in [0.5, 1.0, 2.0] {
            let v = indirect_utility(&cd_half(), &[t, t], &cfg).unwrap();
            assert!((v - 1.0 / (2.0 * t)).abs() < 1e-14);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn maximizers_are_feasible() {
        let cfg = SolverConfig::default();
        let lin = UtilityModel::linear(vec![0.3, 1.0]).unwrap();
        for (u, p) in [(cd_half(), vec![0.7, 3.0]), (lin, vec![2.0, 0.5])] {
            for r in [demand(&u, &p, &cfg).unwrap(), demand_grid(&u, &p, 1e-2, 1e-9).unwrap()] {
                for x in r.maximizers.sample_points(3) {
                    assert!(budget_contains(&p, &x, 1e-8).unwrap());
                    assert!((u.value(&x).unwrap() - r.value).abs() <= 1e-9 * (1.0 + r.value.abs()));
                }
            }
        }
    }

    #[test]
    fn cross_check_passes_for_consistent_solvers() {
        let cfg = SolverConfig { grid_step: 1e-2, ..SolverConfig::default() };
        let lin = UtilityModel::linear(vec![1.0, 2.0]).unwrap();
        assert!(cross_checked_demand(&lin, &[1.0, 1.0], &cfg).is_ok());
        let strict = SolverConfig { grid_step: 0.3, cross_check_tol: 1e-9, ..SolverConfig::default() };
        assert!(matches!(cross_checked_demand(&cd_half(), &[1.0, 1.0], &strict), Err(Error::Indeterminate(_))));
    }
}
