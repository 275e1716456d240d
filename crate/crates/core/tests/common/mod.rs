//! Instance generators and closed-form reference values shared by the test
//! targets. Nothing here calls into the coderivative or subdifferential code.

#![allow(dead_code)]

use consumer_sensitivity::UtilityModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone)]
pub struct CdInstance {
    pub scale: f64,
    pub alphas: Vec<f64>,
    pub model: UtilityModel,
    pub price: Vec<f64>,
}

impl CdInstance {
    pub fn random(rng: &mut ChaCha8Rng, n: usize) -> Self {
        let scale = rng.gen_range(0.5..3.0);
        let alphas: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.95)).collect();
        let price = interior_price(rng, n, 0.2, 5.0);
        let model = UtilityModel::cobb_douglas(scale, alphas.clone()).unwrap();
        Self { scale, alphas, model, price }
    }

    /// Demand `x_i = (a_i / Σa) / p_i` evaluated at `p`.
    pub fn demand_at(&self, p: &[f64]) -> Vec<f64> {
        let s: f64 = self.alphas.iter().sum();
        self.alphas.iter().zip(p).map(|(a, pi)| a / s / pi).collect()
    }

    pub fn demand(&self) -> Vec<f64> {
        self.demand_at(&self.price)
    }

    /// `v(p) = A Π (a_i / (Σa p_i))^{a_i}`.
    pub fn v(&self, p: &[f64]) -> f64 {
        let s: f64 = self.alphas.iter().sum();
        self.scale * self.alphas.iter().zip(p).map(|(a, pi)| (a / (s * pi)).powf(*a)).product::<f64>()
    }

    /// `∂v/∂p_j = -a_j v(p) / p_j`.
    pub fn grad_v(&self, p: &[f64]) -> Vec<f64> {
        let v = self.v(p);
        self.alphas.iter().zip(p).map(|(a, pi)| -a * v / pi).collect()
    }
}

pub fn interior_price(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let len = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len > 0.1 {
            return q.iter().map(|v| v / len).collect();
        }
    }
}

/// A nonzero bundle of `B(p)`, optionally with zero coordinates, either on
/// the budget line or at budget level `s ∈ [0.3, 0.9]`. Nonzero coordinates
/// stay well above the active-set tolerance.
pub fn budget_point(rng: &mut ChaCha8Rng, p: &[f64], with_active: bool, on_line: bool) -> Vec<f64> {
    let n = p.len();
    let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    if with_active && n > 1 {
        let zeros = rng.gen_range(1..n);
        let mut idx: Vec<usize> = (0..n).collect();
        for k in 0..zeros {
            let j = rng.gen_range(k..n);
            idx.swap(k, j);
            w[idx[k]] = 0.0;
        }
    }
    let level = if on_line { 1.0 } else { rng.gen_range(0.3..0.9) };
    let s: f64 = w.iter().zip(p).map(|(a, b)| a * b).sum();
    w.iter().map(|v| v * level / s).collect()
}

/// `dist(x, B(p))` by bisection on the budget multiplier, independent of the
/// library's sorted-breakpoint projection.
pub fn distance_to_budget(p: &[f64], x: &[f64]) -> f64 {
    let clipped: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    let spend = |mu: f64| -> f64 { p.iter().zip(x).map(|(pi, xi)| pi * (xi - mu * pi).max(0.0)).sum() };
    let y = if p.iter().zip(&clipped).map(|(a, b)| a * b).sum::<f64>() <= 1.0 {
        clipped
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        while spend(hi) > 1.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if spend(mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        x.iter().zip(p).map(|(xi, pi)| (xi - hi * pi).max(0.0)).collect()
    };
    x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let scale = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale.max(f64::MIN_POSITIVE)
}
