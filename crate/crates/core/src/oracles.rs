//! Brute-force numerical checks that do not use the coderivative formulas:
//! sampled Dini derivatives and finite-difference gradients of `v`, sampled
//! `ε`-normal tests on the graph of the budget map, and an empirical test of
//! the Aubin (Lipschitz-like) inclusion `B(p) ∩ V ⊂ B(p') + ℓ |p - p'| ball`.
//!
//! These are statistical evidence, not proofs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::budget::project_onto_budget;
use crate::demand::{indirect_utility, SolverConfig};
use crate::utility::UtilityModel;
use crate::vecops::{check_dim, dot, norm, sub};
use crate::{Error, Result};

/// Geometric step schedule `t_k = t0 * ratio^k`, `k = 0..count`, plus the
/// radius of sampled price neighbourhoods.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingSchedule {
    t0: f64,
    ratio: f64,
    count: usize,
    radius: f64,
}

impl Default for SamplingSchedule {
    fn default() -> Self {
        Self { t0: 1e-2, ratio: 0.5, count: 24, radius: 1e-2 }
    }
}

impl SamplingSchedule {
    pub fn new(t0: f64, ratio: f64, count: usize, radius: f64) -> Result<Self> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::InvalidParameter(format!("t0 must be positive, got {t0}")));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidParameter(format!("ratio must lie in (0, 1), got {ratio}")));
        }
        if count == 0 {
            return Err(Error::InvalidParameter("schedule needs at least one step".into()));
        }
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {radius}")));
        }
        let smallest = t0 * ratio.powi(count as i32 - 1);
        if !(smallest > 1e3 * f64::EPSILON) {
            return Err(Error::InvalidParameter(format!(
                "smallest step {smallest:e} is below 1e3 machine epsilons"
            )));
        }
        Ok(Self { t0, ratio, count, radius })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn steps(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.t0 * self.ratio.powi(k as i32)).collect()
    }

    /// Number of trailing steps the limsup/liminf estimators look at.
    pub fn tail_len(&self) -> usize {
        self.count.div_ceil(3)
    }
}

/// `(t, (v(p̄ + t q) - v(p̄)) / t)` for every step of the schedule.
pub fn difference_quotients(
    u: &UtilityModel,
    p_bar: &[f64],
    q: &[f64],
    sched: &SamplingSchedule,
    cfg: &SolverConfig,
) -> Result<Vec<(f64, f64)>> {
    check_dim(u.dim(), p_bar)?;
    check_dim(u.dim(), q)?;
    let base = indirect_utility(u, p_bar, cfg)?;
    sched
        .steps()
        .into_iter()
        .map(|t| {
            let p: Vec<f64> = p_bar.iter().zip(q).map(|(a, b)| a + t * b).collect();
            if p.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::LeavesPriceCone { step: t });
            }
            Ok((t, (indirect_utility(u, &p, cfg)? - base) / t))
        })
        .collect()
}

fn tail(quotients: &[(f64, f64)], tail_len: usize) -> impl Iterator<Item = f64> + '_ {
    quotients[quotients.len() - tail_len..].iter().map(|(_, d)| *d)
}

/// Estimate of `d⁺v(p̄; q)`: the largest quotient over the schedule tail.
pub fn dini_upper(u: &UtilityModel, p_bar: &[f64], q: &[f64], sched: &SamplingSchedule, cfg: &SolverConfig) -> Result<f64> {
    let qs = difference_quotients(u, p_bar, q, sched, cfg)?;
    Ok(tail(&qs, sched.tail_len()).fold(f64::NEG_INFINITY, f64::max))
}

/// Estimate of `d⁻v(p̄; q)`: the smallest quotient over the schedule tail.
pub fn dini_lower(u: &UtilityModel, p_bar: &[f64], q: &[f64], sched: &SamplingSchedule, cfg: &SolverConfig) -> Result<f64> {
    let qs = difference_quotients(u, p_bar, q, sched, cfg)?;
    Ok(tail(&qs, sched.tail_len()).fold(f64::INFINITY, f64::min))
}

/// Both Dini estimates from one pass over the schedule, as `(lower, upper)`.
pub fn dini_pair(
    u: &UtilityModel,
    p_bar: &[f64],
    q: &[f64],
    sched: &SamplingSchedule,
    cfg: &SolverConfig,
) -> Result<(f64, f64)> {
    let qs = difference_quotients(u, p_bar, q, sched, cfg)?;
    let lo = tail(&qs, sched.tail_len()).fold(f64::INFINITY, f64::min);
    let hi = tail(&qs, sched.tail_len()).fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Central differences of `v` with step `h * max(1, p̄_i)` per coordinate.
pub fn fd_gradient_v(u: &UtilityModel, p_bar: &[f64], h: f64, cfg: &SolverConfig) -> Result<Vec<f64>> {
    check_dim(u.dim(), p_bar)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("finite-difference step must be positive".into()));
    }
    let mut probe = p_bar.to_vec();
    let mut grad = Vec::with_capacity(p_bar.len());
    for i in 0..p_bar.len() {
        let step = h * p_bar[i].abs().max(1.0);
        if !(p_bar[i] - step > 0.0) {
            return Err(Error::LeavesPriceCone { step });
        }
        probe[i] = p_bar[i] + step;
        let up = indirect_utility(u, &probe, cfg)?;
        probe[i] = p_bar[i] - step;
        let down = indirect_utility(u, &probe, cfg)?;
        probe[i] = p_bar[i];
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}

/// Uniform sample from the ball of radius `r` around `center`.
fn ball_point(rng: &mut ChaCha8Rng, center: &[f64], r: f64) -> Vec<f64> {
    let n = center.len();
    let dir: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let len = norm(&dir);
    let scale = if len > 0.0 { r * rng.gen::<f64>().powf(1.0 / n as f64) / len } else { 0.0 };
    center.iter().zip(&dir).map(|(c, d)| c + scale * d).collect()
}

/// Rejection sample from the ball around `p̄` intersected with the orthant
/// (`interior` demands strictly positive coordinates).
fn price_in_ball(rng: &mut ChaCha8Rng, p_bar: &[f64], r: f64, interior: bool) -> Option<Vec<f64>> {
    for _ in 0..1000 {
        let p = ball_point(rng, p_bar, r);
        if p.iter().all(|&v| if interior { v > 0.0 } else { v >= 0.0 }) {
            return Some(p);
        }
    }
    None
}

/// A bundle of `B(p)` near `x̄`: on the face `<p, x> = 1` when `face`,
/// otherwise strictly inside. Coordinates pushed below zero are clipped, so
/// active coordinates of `x̄` are hit with positive probability.
fn bundle_near(rng: &mut ChaCha8Rng, p: &[f64], x_bar: &[f64], r: f64, face: bool) -> Option<Vec<f64>> {
    let y: Vec<f64> = ball_point(rng, x_bar, r).into_iter().map(|v| v.max(0.0)).collect();
    let s = dot(p, &y);
    if face {
        if s > 0.0 {
            Some(y.iter().map(|v| v / s).collect())
        } else {
            None
        }
    } else if s < 1.0 {
        Some(y)
    } else {
        let shrink = 1.0 - rng.gen::<f64>() * r;
        Some(y.iter().map(|v| v / s * shrink).collect())
    }
}

/// Parameters of [`aubin_inclusion_test`].
#[derive(Debug, Clone, PartialEq)]
pub struct AubinConfig {
    /// Radius of the price neighbourhood `U` of `p̄`.
    pub price_radius: f64,
    /// Radius of the bundle neighbourhood `V` of `x̄`.
    pub point_radius: f64,
    /// Number of sampled `(p, p', x)` triples.
    pub samples: usize,
    /// Candidate moduli, tried in increasing order.
    pub ell_grid: Vec<f64>,
    pub seed: u64,
}

impl Default for AubinConfig {
    fn default() -> Self {
        Self { price_radius: 0.1, point_radius: 0.1, samples: 1000, ell_grid: default_ell_grid(), seed: 0 }
    }
}

/// `10^(k/10)` for `k = -30..=60`.
pub fn default_ell_grid() -> Vec<f64> {
    (-30..=60).map(|k| 10f64.powf(k as f64 / 10.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AubinReport {
    /// Smallest grid modulus satisfied by every sample, if any.
    pub ell: Option<f64>,
    /// `max dist(x, B(p')) / |p - p'|` over the samples with `p != p'`.
    pub max_ratio: f64,
    pub samples_used: usize,
    /// Samples for which no admissible bundle was found.
    pub skipped: usize,
}

/// One sampled triple of the Aubin test: prices `p`, `p'` and `x ∈ B(p) ∩ V`.
#[derive(Debug, Clone, PartialEq)]
pub struct AubinSample {
    pub p: Vec<f64>,
    pub p_prime: Vec<f64>,
    pub x: Vec<f64>,
}

/// Draws the triples used by [`aubin_inclusion_test`]: `p, p'` in the price
/// neighbourhood of `p̄` (within the closed orthant) and `x ∈ B(p) ∩ V`,
/// alternating bundles on the budget face and strictly inside. Returns the
/// samples and the number of draws that produced no admissible bundle.
pub fn aubin_samples(p_bar: &[f64], x_bar: &[f64], cfg: &AubinConfig) -> Result<(Vec<AubinSample>, usize)> {
    check_dim(p_bar.len(), x_bar)?;
    for v in [p_bar, x_bar] {
        if let Some((index, &value)) = v.iter().enumerate().find(|(_, &c)| !(c >= 0.0)) {
            return Err(Error::OutsideCone { index, value });
        }
    }
    if x_bar.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroBundle);
    }
    if dot(p_bar, x_bar) > 1.0 + 1e-12 {
        return Err(Error::OutsideBudget { value: dot(p_bar, x_bar) });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = Vec::with_capacity(cfg.samples);
    let mut skipped = 0;
    for k in 0..cfg.samples {
        let (Some(p), Some(p_prime)) = (
            price_in_ball(&mut rng, p_bar, cfg.price_radius, false),
            price_in_ball(&mut rng, p_bar, cfg.price_radius, false),
        ) else {
            skipped += 1;
            continue;
        };
        let x = (0..100).find_map(|_| {
            bundle_near(&mut rng, &p, x_bar, cfg.point_radius, k % 2 == 0)
                .filter(|x| norm(&sub(x, x_bar)) <= cfg.point_radius)
        });
        match x {
            Some(x) => samples.push(AubinSample { p, p_prime, x }),
            None => skipped += 1,
        }
    }
    Ok((samples, skipped))
}

/// Finds the smallest `ℓ` on the grid with `dist(x, B(p')) <= ℓ |p - p'|`
/// for every triple from [`aubin_samples`].
pub fn aubin_inclusion_test(p_bar: &[f64], x_bar: &[f64], cfg: &AubinConfig) -> Result<AubinReport> {
    let (samples, skipped) = aubin_samples(p_bar, x_bar, cfg)?;
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
    for s in &samples {
        let dist = norm(&sub(&s.x, &project_onto_budget(&s.p_prime, &s.x, 1e-12)?));
        pairs.push((dist, norm(&sub(&s.p, &s.p_prime))));
    }
    let max_ratio = pairs.iter().filter(|(_, dp)| *dp > 0.0).map(|(d, dp)| d / dp).fold(0.0, f64::max);
    let ell = cfg
        .ell_grid
        .iter()
        .copied()
        .find(|&l| pairs.iter().all(|(d, dp)| *d <= l * dp + 1e-12));
    Ok(AubinReport { ell, max_ratio, samples_used: pairs.len(), skipped })
}

/// Source of points `(p, x)` of a graph near a base point.
pub trait GraphSampler {
    fn base(&self) -> (&[f64], &[f64]);
    fn sample(&mut self) -> Option<(Vec<f64>, Vec<f64>)>;
}

/// Samples `gph B` near `(p̄, x̄)`: prices uniform in a ball around `p̄`
/// within the open orthant, bundles alternating between the budget face and
/// the interior of `B(p)`.
#[derive(Debug, Clone)]
pub struct BudgetGraphSampler {
    p_bar: Vec<f64>,
    x_bar: Vec<f64>,
    radius: f64,
    rng: ChaCha8Rng,
    face: bool,
}

impl BudgetGraphSampler {
    pub fn new(p_bar: &[f64], x_bar: &[f64], radius: f64, seed: u64) -> Result<Self> {
        check_dim(p_bar.len(), x_bar)?;
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter("sampling radius must be positive".into()));
        }
        Ok(Self { p_bar: p_bar.to_vec(), x_bar: x_bar.to_vec(), radius, rng: ChaCha8Rng::seed_from_u64(seed), face: true })
    }
}

impl GraphSampler for BudgetGraphSampler {
    fn base(&self) -> (&[f64], &[f64]) {
        (&self.p_bar, &self.x_bar)
    }

    fn sample(&mut self) -> Option<(Vec<f64>, Vec<f64>)> {
        let p = price_in_ball(&mut self.rng, &self.p_bar, self.radius, true)?;
        self.face = !self.face;
        let x = bundle_near(&mut self.rng, &p, &self.x_bar, self.radius, self.face)?;
        Some((p, x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonNormalOutcome {
    pub passed: bool,
    /// Largest sampled `<ξ, g - ḡ> / |g - ḡ|`.
    pub worst_ratio: f64,
    pub samples_used: usize,
    /// Draws that coincided with the base point or failed to produce a point.
    pub skipped: usize,
}

/// Tests whether `(normal_p, normal_x)` is an `ε`-normal to the sampled
/// graph at its base point: `<ξ, g - ḡ> / |g - ḡ| <= ε` over all samples.
///
/// For a coderivative value `x ∈ D*B(p̄, x̄)(x*)` the candidate is
/// `(x, -x*)`.
pub fn epsilon_normal_test<S: GraphSampler>(
    sampler: &mut S,
    normal_p: &[f64],
    normal_x: &[f64],
    eps: f64,
    samples: usize,
) -> Result<EpsilonNormalOutcome> {
    let (p_bar, x_bar) = sampler.base();
    let (p_bar, x_bar) = (p_bar.to_vec(), x_bar.to_vec());
    check_dim(p_bar.len(), normal_p)?;
    check_dim(x_bar.len(), normal_x)?;
    let mut worst = f64::NEG_INFINITY;
    let mut used = 0;
    let mut skipped = 0;
    for _ in 0..samples {
        let Some((p, x)) = sampler.sample() else {
            skipped += 1;
            continue;
        };
        let dp = sub(&p, &p_bar);
        let dx = sub(&x, &x_bar);
        let len = (dot(&dp, &dp) + dot(&dx, &dx)).sqrt();
        if len <= 1e-15 {
            skipped += 1;
            continue;
        }
        worst = worst.max((dot(normal_p, &dp) + dot(normal_x, &dx)) / len);
        used += 1;
    }
    Ok(EpsilonNormalOutcome { passed: worst <= eps, worst_ratio: worst, samples_used: used, skipped })
}
