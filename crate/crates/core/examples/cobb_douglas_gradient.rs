//! For Cobb-Douglas utility the indirect utility is smooth, and the
//! Fréchet estimate collapses to the single point `<∇u(x̄), x̄> x̄`, which is
//! `-∇v(p̄)`. This example compares it with a central difference of `v`.
//!
//! Run with `cargo run --example cobb_douglas_gradient`.

use consumer_sensitivity::oracles::fd_gradient_v;
use consumer_sensitivity::subdiff::Hypothesis;
use consumer_sensitivity::{demand, frechet_subdiff_estimate, Hypotheses, Maximizers, SolverConfig, UtilityModel};

fn main() -> consumer_sensitivity::Result<()> {
    let u = UtilityModel::cobb_douglas(1.5, vec![0.2, 0.3, 0.4])?;
    let p = [0.8, 1.5, 2.0];
    let cfg = SolverConfig::default();

    let d = demand(&u, &p, &cfg)?;
    let Maximizers::Points(points) = &d.maximizers else { unreachable!("Cobb-Douglas demand is a point") };
    let x = &points[0];
    println!("demand x̄ = {x:?}");

    let hyps = Hypotheses::none().with(Hypothesis::UpperLipschitzianSelection);
    let est = frechet_subdiff_estimate(&u, &p, x, &hyps, 1e-9)?;
    let seg = &est.set.segments()[0];
    let (lambda, _) = seg.lambdas.bounds().expect("non-empty");
    let from_estimate: Vec<f64> = seg.base.iter().map(|b| -lambda * b).collect();
    let numeric = fd_gradient_v(&u, &p, 1e-6, &cfg)?;

    println!("{:?} estimate", est.exactness);
    for (i, (a, b)) in from_estimate.iter().zip(&numeric).enumerate() {
        println!("∂v/∂p{i}: from estimate {a:+.10}, central difference {b:+.10}");
    }
    Ok(())
}
