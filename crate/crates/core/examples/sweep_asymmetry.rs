//! Hold the network-wide transition rate fixed and vary the source asymmetry.
//!
//! ```not_rust
//! cargo run --release --example sweep_asymmetry
//! ```

use aloha_entropy::optimizer::{sweep_asymmetry, Strategy, SweepSettings};

fn main() {
    let etas = [1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0];
    let strategies = [Strategy::Random, Strategy::Reactive, Strategy::Balanced];
    let rows = sweep_asymmetry(50, 0.8, &etas, &strategies, &SweepSettings::default());
    println!("{:>5} {:>9} {:>10}  policy", "eta", "strategy", "H [bits]");
    for row in rows {
        match row.outcome {
            Ok(cell) => println!(
                "{:5} {:>9} {:10.6}  {}",
                row.eta, row.strategy, cell.entropy, cell.policy
            ),
            Err(e) => println!("{:5} {:>9} error: {e}", row.eta, row.strategy),
        }
    }
}
