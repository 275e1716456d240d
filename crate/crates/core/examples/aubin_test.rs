//! Sampling test of the Aubin property of the budget map: the smallest
//! modulus `ℓ` from a grid with `dist(x, B(p')) <= ℓ |p - p'|` over sampled
//! `x ∈ B(p)` near `x̄`.
//!
//! Run with `cargo run --example aubin_test`.

use consumer_sensitivity::oracles::{aubin_inclusion_test, AubinConfig};

fn main() -> consumer_sensitivity::Result<()> {
    let cfg = AubinConfig { samples: 2000, seed: 7, ..AubinConfig::default() };
    for (p, x) in [(vec![1.0, 2.0], vec![0.5, 0.25]), (vec![1.0, 1.0], vec![0.0, 1.0]), (vec![4.0], vec![0.25])] {
        let r = aubin_inclusion_test(&p, &x, &cfg)?;
        println!(
            "p̄ = {p:?}, x̄ = {x:?}: ℓ = {:?}, max ratio {:.4} over {} samples ({} skipped)",
            r.ell, r.max_ratio, r.samples_used, r.skipped
        );
    }
    Ok(())
}
