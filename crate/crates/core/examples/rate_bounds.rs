//! Bounds on the directional rate of change of `v`, set against sampled
//! lower and upper Dini derivatives.
//!
//! Run with `cargo run --example rate_bounds`.

use consumer_sensitivity::oracles::{dini_pair, SamplingSchedule};
use consumer_sensitivity::subdiff::Hypothesis;
use consumer_sensitivity::{
    demand, limiting_subdiff_estimate, rate_of_change_bounds, Hypotheses, LimitingMode, SolverConfig, UtilityModel,
};

fn main() -> consumer_sensitivity::Result<()> {
    let cfg = SolverConfig::default();
    let sched = SamplingSchedule::default();
    let hyps: Hypotheses = [
        Hypothesis::NonSatiety,
        Hypothesis::InnerSemicontinuity,
        Hypothesis::UpperLipschitzianSelection,
        Hypothesis::DirectionalLipschitz,
    ]
    .into_iter()
    .collect();

    let u = UtilityModel::cobb_douglas(1.0, vec![0.5, 0.5])?;
    let p = [1.0, 2.0];
    let mode = LimitingMode::InnerSemicompact { demand: demand(&u, &p, &cfg)?.maximizers };
    let report = limiting_subdiff_estimate(&u, &p, &mode, &hyps, 1e-9)?;
    println!("Cobb-Douglas at p̄ = {p:?}");
    for q in [[1.0, 0.0], [0.0, 1.0], [0.6, -0.8]] {
        let b = rate_of_change_bounds(&report, &q, &hyps)?;
        let (lo, hi) = dini_pair(&u, &p, &q, &sched, &cfg)?;
        println!("  q = {q:?}: bounds [{:.8}, {:.8}], Dini [{lo:.8}, {hi:.8}]", b.lower, b.upper);
    }

    let kinked = UtilityModel::piecewise_linear_1d(vec![0.0, 1.0], vec![2.0, 0.5, 0.0], 0.0)?;
    let p = [1.0];
    let mode = LimitingMode::InnerSemicompact { demand: demand(&kinked, &p, &cfg)?.maximizers };
    let report = limiting_subdiff_estimate(&kinked, &p, &mode, &hyps, 1e-9)?;
    println!("piecewise-linear utility at p̄ = 1");
    for q in [[1.0], [-1.0]] {
        let b = rate_of_change_bounds(&report, &q, &hyps)?;
        let (lo, hi) = dini_pair(&kinked, &p, &q, &sched, &cfg)?;
        println!("  q = {q:?}: bounds [{:.8}, {:.8}], Dini [{lo:.8}, {hi:.8}]", b.lower, b.upper);
    }
    Ok(())
}
