//! Stationary law, entropy and transition budgets of a two-state source.
//!
//! ```not_rust
//! cargo run --example source_basics
//! ```

use aloha_entropy::SourceParams;

fn main() -> aloha_entropy::Result<()> {
    for (alpha, beta) in [(0.02, 0.02), (0.1, 0.01), (0.01, 0.1)] {
        let s = SourceParams::new(alpha, beta)?;
        let pi = s.stationary();
        println!(
            "alpha={alpha:<5} beta={beta:<5} pi=({:.4}, {:.4}) eta={:<6.3} H(X)={:.4} bits, {:.5} transitions/slot",
            pi.pi0,
            pi.pi1,
            s.asymmetry_factor(),
            s.entropy(),
            s.transition_rate()
        );
    }

    // 50 nodes sharing 0.8 source transitions per slot
    for eta in [1.0, 10.0] {
        let s = SourceParams::from_budget(eta, 50, 0.8)?;
        println!("eta={eta:>4}: alpha={:.4} beta={:.4}", s.alpha(), s.beta());
    }
    match SourceParams::from_budget(1.0, 1, 2.5) {
        Err(e) => println!("one node, 2.5 transitions/slot: {e}"),
        Ok(s) => println!("unexpectedly feasible: {s:?}"),
    }
    Ok(())
}
