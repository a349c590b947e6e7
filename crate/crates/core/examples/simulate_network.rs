//! Exact simulation of the whole network and the empirical statistics it
//! yields.
//!
//! ```not_rust
//! cargo run --release --example simulate_network
//! ```

use aloha_entropy::simulator::{
    empirical_average_entropy, empirical_conditional_law, estimate_occupancy_half_width, run,
    SimConfig,
};
use aloha_entropy::{AccessPolicy, NetworkConfig, SourceParams};

fn main() -> aloha_entropy::Result<()> {
    let net = NetworkConfig::new(
        20,
        SourceParams::new(0.05, 0.02)?,
        AccessPolicy::new(0.0, 1.0, 0.8, 0.0)?,
    )?;
    let config = SimConfig::new(net, 2_000_000, 42);
    let stats = run(&config)?;

    println!(
        "{} slots counted: {} singletons, {} collisions, {} idle",
        stats.counted_slots, stats.singletons, stats.collisions, stats.idles
    );
    println!("node 0 delivered {} updates", stats.receptions);
    for delta in [0u64, 5, 25, 100] {
        for xhat in 0..2 {
            if let Ok(law) = empirical_conditional_law(&stats, delta, xhat) {
                println!(
                    "P(X=0 | delta={delta}, xhat={xhat}) = {:.4} +- {:.4} ({} samples)",
                    law.law.p0, law.std_error, law.samples
                );
            }
        }
    }
    let h = empirical_average_entropy(&stats)?;
    println!(
        "empirical H = {:.4} +- {:.4} bits ({} batches)",
        h.bits, h.half_width, h.batches
    );
    println!(
        "p(xhat = 0) = {:.4} +- {:.4}, estimate wrong {:.2}% of the time",
        stats.estimate_occupancy(0),
        estimate_occupancy_half_width(&stats),
        100.0 * stats.mismatch_fraction()
    );
    Ok(())
}
