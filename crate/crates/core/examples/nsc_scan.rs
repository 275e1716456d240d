//! Non-satiety check: every maximizer returned by the demand solver should
//! exhaust the budget. A utility that is flat beyond a cap fails it.
//!
//! Run with `cargo run --example nsc_scan`.

use consumer_sensitivity::{check_nsc, demand, SolverConfig, UtilityModel};

fn main() -> consumer_sensitivity::Result<()> {
    let cfg = SolverConfig::default();
    let models = [
        ("Cobb-Douglas", UtilityModel::cobb_douglas(1.0, vec![0.3, 0.7])?, vec![vec![1.0, 1.0], vec![0.2, 5.0]]),
        ("linear", UtilityModel::linear(vec![1.0, 2.0])?, vec![vec![1.0, 1.0], vec![3.0, 0.5]]),
        ("capped identity", UtilityModel::capped_identity(1.0)?, vec![vec![0.5], vec![2.0]]),
    ];
    for (name, u, prices) in &models {
        let report = check_nsc(u, prices, |u, p| demand(u, p, &cfg), 1e-6)?;
        println!("{name}: {} prices, {} points, passed = {}", report.prices_checked, report.points_checked, report.passed());
        for v in &report.violations {
            println!("  {v:?}");
        }
    }
    Ok(())
}
