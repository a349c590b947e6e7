//! Sample path of one node with the uncertainty the sink attaches to its
//! estimate at every slot (the Fig. 2 setting: m = 50, alpha = 0.1,
//! beta = 0.01, random access).
//!
//! ```not_rust
//! cargo run --release --example timeline
//! ```

use aloha_entropy::simulator::{sample_timeline, SimConfig, SlotOutcome};
use aloha_entropy::{AccessPolicy, NetworkConfig, SourceParams};

fn main() -> aloha_entropy::Result<()> {
    let source = SourceParams::new(0.1, 0.01)?;
    let net = NetworkConfig::new(50, source, AccessPolicy::random(50)?)?;
    let rows = sample_timeline(&SimConfig::new(net, 200_000, 1), 0, 600)?;

    let peak = rows.iter().filter_map(|r| r.entropy).fold(0.0, f64::max);
    println!(
        "stationary entropy {:.4} bits, peak along the path {peak:.4} bits",
        source.entropy()
    );
    for r in &rows {
        if r.outcome == SlotOutcome::Delivered(0) {
            println!("slot {}: delivered x = {}", r.slot, r.state);
        }
    }
    // coarse strip chart, one character per 5 slots
    let chart: String = rows
        .chunks(5)
        .map(|c| match c[0].entropy {
            None => ' ',
            Some(h) => [' ', '.', ':', '-', '=', '#'][((h * 5.0).round() as usize).min(5)],
        })
        .collect();
    println!("|{chart}|");
    Ok(())
}
