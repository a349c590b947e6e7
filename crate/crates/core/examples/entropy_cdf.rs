//! Distribution of the instantaneous uncertainty `h(delta, xhat)` seen by
//! the sink, for random and reactive access at several network sizes.
//!
//! ```not_rust
//! cargo run --example entropy_cdf
//! ```

use aloha_entropy::analysis::{joint_law, JointLawOptions};
use aloha_entropy::{AccessPolicy, NetworkConfig, SourceParams};

fn main() -> aloha_entropy::Result<()> {
    let source = SourceParams::symmetric(0.02)?;
    let zeta = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99];
    print!("{:>16}", "P(h <= zeta)");
    for z in zeta {
        print!("{z:>8}");
    }
    println!();
    for m in [10usize, 50, 100] {
        for (name, policy) in [
            ("random", AccessPolicy::random(m)?),
            ("reactive", AccessPolicy::reactive()),
        ] {
            let law = joint_law(
                &NetworkConfig::new(m, source, policy)?,
                JointLawOptions::default(),
            )?;
            print!("{:>16}", format!("{name} m={m}"));
            for p in law.entropy_cdf(&zeta)? {
                print!("{:8.4}", p.probability);
            }
            println!();
        }
    }
    Ok(())
}
