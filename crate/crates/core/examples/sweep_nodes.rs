//! Average uncertainty against network size for each access strategy.
//!
//! ```not_rust
//! cargo run --release --example sweep_nodes
//! ```

use aloha_entropy::optimizer::{sweep_nodes, Strategy, SweepSettings};
use aloha_entropy::SourceParams;

fn main() -> aloha_entropy::Result<()> {
    let source = SourceParams::symmetric(0.02)?;
    let ms = [5, 10, 20, 50, 100, 200];
    let rows = sweep_nodes(source, &ms, &Strategy::ALL, &SweepSettings::default());
    println!(
        "{:>4} {:>9} {:>9} {:>6}  policy",
        "m", "strategy", "H [bits]", "load"
    );
    for row in rows {
        match row.outcome {
            Ok(c) => println!(
                "{:4} {:>9} {:9.5} {:6.3}  {}",
                row.m, row.strategy, c.entropy, c.load, c.policy
            ),
            Err(e) => println!("{:4} {:>9} {e}", row.m, row.strategy),
        }
    }
    Ok(())
}
