//! Compare the analysis with an exact simulation at the Fig. 3 setting
//! (m = 50, alpha = beta = 0.02, reactive access). Pass the number of
//! slots as the first argument; the default is 10^7.
//!
//! ```not_rust
//! cargo run --release --example validate_fig3 -- 1e6
//! ```

use aloha_entropy::experiment::{validate, Count};
use aloha_entropy::simulator::SimConfig;
use aloha_entropy::{AccessPolicy, NetworkConfig, SourceParams};

fn main() -> aloha_entropy::Result<()> {
    let slots = match std::env::args().nth(1) {
        Some(arg) => {
            arg.parse::<Count>()
                .map_err(aloha_entropy::Error::Config)?
                .0
        }
        None => 10_000_000,
    };
    let net = NetworkConfig::new(50, SourceParams::symmetric(0.02)?, AccessPolicy::reactive())?;
    let report = validate(&SimConfig::new(net, slots, 7), 200)?;
    for c in &report.checks {
        let which = c.xhat.map(|x| format!(" xhat={x}")).unwrap_or_default();
        println!(
            "{:<16}{which:<7} max |diff| {:.5} (tolerance {}) {}",
            c.quantity,
            c.max_abs_diff,
            c.tolerance,
            if c.passed { "ok" } else { "FAIL" }
        );
    }
    println!("overall: {}", if report.passed { "PASS" } else { "FAIL" });
    Ok(())
}
