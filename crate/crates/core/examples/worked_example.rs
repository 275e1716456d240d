//! One good with utility `u(x) = min(x, 1)`.
//!
//! Demand is the whole segment `[1, 1/p]` for prices below 1, so `v` has a
//! kink at `p = 1`. There the Fréchet estimate is unavailable and the
//! limiting estimate is the segment `[0, 1]·1`.
//!
//! Run with `cargo run --example worked_example`.

use consumer_sensitivity::subdiff::Hypothesis;
use consumer_sensitivity::{
    demand, indirect_utility, limiting_subdiff_estimate, rate_of_change_bounds, Hypotheses, LimitingMode,
    SolverConfig, UtilityModel,
};

fn main() -> consumer_sensitivity::Result<()> {
    let u = UtilityModel::capped_identity(1.0)?;
    let cfg = SolverConfig::default();

    for p in [0.25, 0.5, 1.0, 2.0] {
        let d = demand(&u, &[p], &cfg)?;
        println!("p = {p:<4}  v = {:<6}  D(p) = {:?}", indirect_utility(&u, &[p], &cfg)?, d.maximizers);
    }

    let hyps: Hypotheses = [Hypothesis::InnerSemicontinuity, Hypothesis::DirectionalLipschitz].into_iter().collect();
    let mode = LimitingMode::InnerSemicontinuous { x_bar: vec![1.0] };
    let report = limiting_subdiff_estimate(&u, &[1.0], &mode, &hyps, 1e-9)?;
    println!("\nat p = 1, x = 1:");
    println!("  frechet  {:?}", report.frechet);
    println!("  limiting {:?}", report.limiting);
    println!("  singular {:?}", report.singular);
    for q in [1.0, -1.0] {
        let b = rate_of_change_bounds(&report, &[q], &hyps)?;
        println!("  q = {q:+}: {} <= d v(1; q) <= {}", b.lower, b.upper);
    }
    Ok(())
}
