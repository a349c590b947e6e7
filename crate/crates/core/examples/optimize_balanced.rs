//! Find the balanced policy for a symmetric network and compare it with the
//! reactive and random baselines.
//!
//! ```not_rust
//! cargo run --release --example optimize_balanced
//! ```

use std::time::Instant;

use aloha_entropy::analysis::average_conditional_entropy;
use aloha_entropy::optimizer::{optimize, OptimizationProblem};
use aloha_entropy::{AccessPolicy, NetworkConfig, SourceParams};

fn main() -> aloha_entropy::Result<()> {
    let source = SourceParams::symmetric(0.02)?;
    for m in [10usize, 50, 200] {
        let start = Instant::now();
        let result = optimize(&OptimizationProblem::new(m, source))?;
        let h = |p: AccessPolicy| -> aloha_entropy::Result<f64> {
            Ok(average_conditional_entropy(&NetworkConfig::new(m, source, p)?, 1e-12)?.bits)
        };
        println!(
            "m = {m:4}: balanced {} -> {:.6} bits ({} evaluations, {:.1?})",
            result.policy,
            result.objective,
            result.evaluations,
            start.elapsed()
        );
        println!(
            "          reactive {:.6} bits, random {:.6} bits",
            h(AccessPolicy::reactive())?,
            h(AccessPolicy::random(m)?)?
        );
    }
    Ok(())
}
