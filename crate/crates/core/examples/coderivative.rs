//! Coderivative of the budget map `B(p) = {x >= 0 : <p, x> <= 1}` at a few
//! graph points, for the covector `x* = -p̄ / 2`.
//!
//! Run with `cargo run --example coderivative`.

use consumer_sensitivity::{coderivative_budget, normal_cone_at, support_function, OrthantCone};

fn main() -> consumer_sensitivity::Result<()> {
    let p = [1.0, 2.0];
    let cases: [(&str, [f64; 2]); 3] = [
        ("interior of the budget line", [0.5, 0.25]),
        ("budget line, first good absent", [0.0, 0.5]),
        ("strictly inside the budget set", [0.2, 0.1]),
    ];
    let x_star = [-0.5, -1.0];
    for (label, x) in cases {
        let cone = normal_cone_at(&OrthantCone::new(2)?, &x, 1e-9)?;
        let value = coderivative_budget(&p, &x, &x_star, 1e-9)?.into_set();
        println!("{label}: x̄ = {x:?}");
        println!("  active coordinates {:?}", cone.active());
        println!("  D*B(p̄, x̄)(x*) = {value:?}");
        println!("  support in direction (1, 0): {}", support_function(&value, &[1.0, 0.0])?);
    }
    Ok(())
}
