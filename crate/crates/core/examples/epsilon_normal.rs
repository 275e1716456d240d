//! Checks that coderivative outputs are ε-normals to the graph of the budget
//! map by sampling nearby graph points.
//!
//! Run with `cargo run --example epsilon_normal`.

use consumer_sensitivity::oracles::{epsilon_normal_test, BudgetGraphSampler};
use consumer_sensitivity::{coderivative_budget, RaySegmentSet};

fn main() -> consumer_sensitivity::Result<()> {
    let p = [1.0, 2.0];
    let x = [0.5, 0.25];
    let x_star = [-0.5, -1.0];
    let RaySegmentSet::Union(segs) = coderivative_budget(&p, &x, &x_star, 1e-9)?.into_set() else {
        unreachable!("x̄ is on the budget line")
    };
    let minus_star: Vec<f64> = x_star.iter().map(|v| -v).collect();
    let (lambda, _) = segs[0].lambdas.bounds().expect("non-empty");
    println!("multiplier λ = {lambda}");
    let out: Vec<f64> = segs[0].base.iter().map(|b| lambda * b).collect();

    let mut sampler = BudgetGraphSampler::new(&p, &x, 1e-3, 1)?;
    let outcome = epsilon_normal_test(&mut sampler, &out, &minus_star, 1e-3, 10_000)?;
    println!("coderivative output: passed = {}, worst ratio {:.2e}", outcome.passed, outcome.worst_ratio);

    // A vector off the ray fails.
    let mut sampler = BudgetGraphSampler::new(&p, &x, 1e-3, 1)?;
    let outcome = epsilon_normal_test(&mut sampler, &[1.0, -1.0], &minus_star, 1e-3, 10_000)?;
    println!("off-ray vector: passed = {}, worst ratio {:.2e}", outcome.passed, outcome.worst_ratio);
    Ok(())
}
