//! Analytical receiver uncertainty for a single configuration: the
//! inter-refresh law, the estimate law, a few conditional source laws and
//! the average conditional entropy.
//!
//! ```not_rust
//! cargo run --example analyze_policy
//! ```

use aloha_entropy::analysis::{
    average_conditional_entropy, conditional_source_law, estimate_law, inter_refresh_law,
    TerminatingChain,
};
use aloha_entropy::{AccessPolicy, NetworkConfig, SourceParams};

fn main() -> aloha_entropy::Result<()> {
    let source = SourceParams::new(0.1, 0.01)?;
    for (name, policy) in [
        ("random", AccessPolicy::random(50)?),
        ("reactive", AccessPolicy::reactive()),
    ] {
        let net = NetworkConfig::new(50, source, policy)?;
        let chain = TerminatingChain::build(&net)?;
        let w = inter_refresh_law(&chain, 1e-12)?;
        let est = estimate_law(&net, &chain)?;
        let h = average_conditional_entropy(&net, 1e-12)?;

        println!("== {name} {policy}");
        println!(
            "   mean access {:.4}, success probability {:.4}, load {:.3}",
            net.mean_access_probability(),
            net.success_probability(),
            net.channel_load()
        );
        println!(
            "   E[W | xhat] = ({:.2}, {:.2}) slots",
            w.mean[0], w.mean[1]
        );
        println!("   p(xhat = 0) = {:.4}", est.p[0]);
        for delta in [0u64, 10, 50, 200] {
            let l0 = conditional_source_law(&chain, delta, 0)?;
            let l1 = conditional_source_law(&chain, delta, 1)?;
            println!(
                "   delta={delta:<4} P(X=0 | xhat=0) = {:.4}, P(X=0 | xhat=1) = {:.4}",
                l0.p0, l1.p0
            );
        }
        println!(
            "   H(X | Delta, Xhat) = {:.6} bits (+- {:.1e})",
            h.bits, h.error_bound
        );
    }
    println!("H(X) = {:.6} bits", source.entropy());
    Ok(())
}
