//! Analytical characterization of the receiver uncertainty.
//!
//! Between two deliveries from the reference node, its source evolves on the
//! transient states of a terminating chain whose absorption is the next
//! successful delivery. Everything else follows from powers of the 2x2
//! transient block `A`:
//!
//! * `p(x | delta, xhat) = e_xhat A^delta e_x / e_xhat A^delta 1`
//! * `p(w | xhat) = e_xhat A^(w-1) a_d`, `E[W | xhat] = e_xhat (I - A)^-1 1`
//! * `p(delta | xhat) = P(W > delta | xhat) / E[W | xhat]`
//! * `p(xhat)` weighs the mean period length by the share of deliveries
//!   that install `xhat`.
//!
//! Powers of `A` are never formed; rows are propagated one vector-matrix
//! product at a time.

mod chain;
mod entropy;
mod laws;

pub use chain::{Row, TerminatingChain};
pub use entropy::{
    conditional_source_law, entropy_timeline, instantaneous_entropy, ConditionalSourceLaw,
    TimelinePoint,
};
pub use laws::{
    aoi_law_given_estimate, average_conditional_entropy, entropy_cdf, estimate_law,
    inter_refresh_law, inter_refresh_law_truncated, joint_law, AoiLaw, AverageEntropy, CdfPoint,
    EstimateLaw, InterRefreshLaw, JointAoiEstimateLaw, JointLawOptions, TailCell,
    DEFAULT_TOLERANCE, MAX_HORIZON,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::policy::{AccessPolicy, NetworkConfig};
    use crate::source::SourceParams;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn config(m: usize, a: f64, b: f64, l: [f64; 4]) -> NetworkConfig {
        NetworkConfig::new(
            m,
            SourceParams::new(a, b).unwrap(),
            AccessPolicy::from_array(l).unwrap(),
        )
        .unwrap()
    }

    const REACTIVE: [f64; 4] = [0.0, 1.0, 1.0, 0.0];

    #[test]
    fn inter_refresh_geometric_for_single_reactive_node() {
        let chain = TerminatingChain::build(&config(1, 0.02, 0.05, REACTIVE)).unwrap();
        let law = inter_refresh_law(&chain, 1e-12).unwrap();
        for w in [1usize, 2, 10, 300] {
            let expect = 0.98f64.powi(w as i32 - 1) * 0.02;
            assert_relative_eq!(law.pmf[0][w - 1], expect, max_relative = 1e-10);
        }
        assert_relative_eq!(law.mean[0], 50.0, max_relative = 1e-12);
        assert_relative_eq!(law.mean[1], 20.0, max_relative = 1e-12);
    }

    #[test]
    fn inter_refresh_one_step() {
        let chain = TerminatingChain::from_parts([[0.0; 2]; 2], [1.0, 1.0], 1.0).unwrap();
        let law = inter_refresh_law(&chain, 1e-12).unwrap();
        assert_eq!(law.pmf[0], vec![1.0]);
        assert_eq!(law.mean, [1.0, 1.0]);
        assert_eq!(law.tail_mass, [0.0, 0.0]);
    }

    #[test]
    fn inter_refresh_mean_matches_sum() {
        let chain =
            TerminatingChain::build(&config(20, 0.03, 0.11, [0.2, 0.7, 0.4, 0.05])).unwrap();
        let law = inter_refresh_law(&chain, 1e-12).unwrap();
        for x in 0..2 {
            let total: f64 = law.pmf[x].iter().sum::<f64>() + law.tail_mass[x];
            assert!((total - 1.0).abs() < 1e-9);
            let gap = law.mean[x] - law.truncated_mean(x);
            assert!(gap >= -1e-9 && gap <= law.mean_truncation_bound(x) + 1e-9);
        }
    }

    #[test]
    fn truncated_inter_refresh_bounds_the_mean() {
        let chain =
            TerminatingChain::build(&config(20, 0.03, 0.11, [0.2, 0.7, 0.4, 0.05])).unwrap();
        let law = inter_refresh_law_truncated(&chain, 25).unwrap();
        assert_eq!(law.w_max(), 25);
        let full = inter_refresh_law(&chain, 1e-12).unwrap();
        for x in 0..2 {
            assert_eq!(law.pmf[x][..], full.pmf[x][..25]);
            assert!(law.tail_mass[x] > 0.1);
            let gap = law.mean[x] - law.truncated_mean(x);
            assert!(gap > 0.0 && gap <= law.mean_truncation_bound(x));
        }
        assert!(inter_refresh_law_truncated(&chain, 0).is_err());
    }

    #[test]
    fn aoi_law_is_geometric_equilibrium_age() {
        let chain = TerminatingChain::build(&config(1, 0.02, 0.3, REACTIVE)).unwrap();
        let law = aoi_law_given_estimate(&chain, 1e-12).unwrap();
        for d in [0usize, 1, 5, 100] {
            assert_relative_eq!(
                law.pmf[0][d],
                0.98f64.powi(d as i32) * 0.02,
                max_relative = 1e-10
            );
        }
        let mean = chain.mean_absorption_times().unwrap();
        for x in 0..2 {
            assert_relative_eq!(law.pmf[x][0], 1.0 / mean[x], max_relative = 1e-14);
            let total: f64 = law.pmf[x].iter().sum::<f64>() + law.tail_mass[x];
            assert!((total - 1.0).abs() < 1e-9);
            assert!(law.tail_mass[x] < 1e-12);
        }
    }

    #[test]
    fn estimate_law_examples() {
        let cfg = config(50, 0.02, 0.02, REACTIVE);
        let chain = TerminatingChain::build(&cfg).unwrap();
        let e = estimate_law(&cfg, &chain).unwrap();
        assert_relative_eq!(e.p[0], 0.5, max_relative = 1e-12);

        // reactive: pi0 alpha = pi1 beta, so half of all deliveries carry 0
        let cfg = config(50, 0.1, 0.01, REACTIVE);
        let chain = TerminatingChain::build(&cfg).unwrap();
        let e = estimate_law(&cfg, &chain).unwrap();
        assert_relative_eq!(e.c[0], 0.5, max_relative = 1e-12);
    }

    #[test]
    fn single_reactive_node_is_certain() {
        for (a, b) in [(0.02, 0.02), (0.1, 0.01), (0.4, 0.003)] {
            let h = average_conditional_entropy(&config(1, a, b, REACTIVE), 1e-12).unwrap();
            assert!(h.bits.abs() <= 1e-12, "{a} {b}: {h:?}");
        }
    }

    #[test]
    fn single_reactive_node_marginal_age_is_geometric() {
        let opts = JointLawOptions {
            tolerance: 1e-12,
            min_horizon: 64,
        };
        let j = joint_law(&config(1, 0.02, 0.02, REACTIVE), opts).unwrap();
        for d in [0u64, 3, 40] {
            let p = j.mass(d, 0).unwrap() + j.mass(d, 1).unwrap();
            assert_relative_eq!(p, 0.98f64.powi(d as i32) * 0.02, max_relative = 1e-10);
        }
    }

    #[test]
    fn joint_law_normalizes() {
        let j = joint_law(
            &config(30, 0.05, 0.02, [0.1, 0.9, 0.6, 0.0]),
            JointLawOptions::default(),
        )
        .unwrap();
        assert!((j.table_mass() + j.tail_mass() - 1.0).abs() < 1e-9);
        assert_eq!(j.entropy_table[0], [0.0, 0.0]);
    }

    #[test]
    fn min_horizon_extends_table() {
        let opts = JointLawOptions {
            tolerance: 1e-12,
            min_horizon: 5000,
        };
        let j = joint_law(&config(50, 0.02, 0.02, [0.02; 4]), opts).unwrap();
        assert!(j.delta_max >= 4999);
    }

    #[test]
    fn reactive_beats_random_symmetric() {
        let r = average_conditional_entropy(&config(50, 0.02, 0.02, REACTIVE), 1e-12).unwrap();
        let q = average_conditional_entropy(&config(50, 0.02, 0.02, [0.02; 4]), 1e-12).unwrap();
        assert!(r.bits < q.bits, "{r:?} vs {q:?}");
    }

    #[test]
    fn huge_networks_tend_to_source_entropy() {
        let mut prev = 0.0;
        for m in [100usize, 500, 1000] {
            let h = average_conditional_entropy(&config(m, 0.02, 0.02, REACTIVE), 1e-12).unwrap();
            assert!(h.bits >= prev && h.bits <= 1.0 + h.error_bound);
            prev = h.bits;
        }
        assert!(prev > 0.99, "{prev}");
    }

    #[test]
    fn cdf_examples() {
        let cfg = config(50, 0.02, 0.02, [0.02; 4]);
        let j = joint_law(&cfg, JointLawOptions::default()).unwrap();
        let cdf = j.entropy_cdf(&[-0.5, 0.0, 0.5, 1.0]).unwrap();
        assert_eq!(cdf[0].probability, 0.0);
        assert!((cdf[3].probability - 1.0).abs() < 1e-9);
        assert!(cdf.windows(2).all(|w| w[1].probability >= w[0].probability));

        let single = entropy_cdf(&config(1, 0.1, 0.2, REACTIVE), 1e-12, &[0.0]).unwrap();
        assert!((single[0].probability - 1.0).abs() < 1e-9);

        assert!(j.entropy_cdf(&[0.5, 0.1]).is_err());
    }

    #[test]
    fn cdf_band_only_near_tail_entropy() {
        let j = joint_law(
            &config(100, 0.02, 0.02, REACTIVE),
            JointLawOptions::default(),
        )
        .unwrap();
        let t = j.tail[0];
        assert!(t.mass > 1e-3 && t.entropy_bound < 1e-3, "{t:?}");
        let cdf = j.entropy_cdf(&[0.5, t.entropy]).unwrap();
        assert_eq!(cdf[0].band, 0.0);
        if t.entropy_bound > 0.0 {
            assert!(cdf[1].band >= t.mass);
        }
    }

    #[test]
    fn degenerate_configs_propagate() {
        assert_eq!(
            average_conditional_entropy(&config(5, 0.1, 0.1, [0.0; 4]), 1e-12),
            Err(Error::DegeneratePolicy)
        );
    }

    fn unit() -> impl Strategy<Value = f64> {
        0.0f64..=1.0
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn entropy_bounds_hold(m in 1usize..120, a in 2e-3f64..0.5, b in 2e-3f64..0.5,
                               l in prop::array::uniform4(unit())) {
            let cfg = config(m, a, b, l);
            if let Ok(j) = joint_law(&cfg, JointLawOptions::default()) {
                prop_assert!((j.table_mass() + j.tail_mass() - 1.0).abs() < 1e-9);
                prop_assert!(j.entropy_table.iter().flatten().all(|h| (0.0..=1.0).contains(h)));
                prop_assert_eq!(j.entropy_table[0], [0.0, 0.0]);
                let h = j.average_entropy();
                prop_assert!(h.bits >= -1e-12);
                prop_assert!(h.bits <= cfg.source.entropy() + h.error_bound + h.tail_mass + 1e-9,
                             "H = {:?} > H(X) = {}", h, cfg.source.entropy());
            }
        }

        #[test]
        fn conditional_law_matches_joint_table(m in 1usize..60, a in 5e-3f64..0.5, b in 5e-3f64..0.5,
                                               l in prop::array::uniform4(0.05f64..=1.0), d in 0u64..40) {
            let cfg = config(m, a, b, l);
            let chain = TerminatingChain::build(&cfg).unwrap();
            let opts = JointLawOptions { tolerance: 1e-12, min_horizon: 64 };
            if let Ok(j) = joint_law(&cfg, opts) {
                for x in 0..2 {
                    if let Ok(h) = instantaneous_entropy(&chain, d, x) {
                        prop_assert!((h - j.entropy_table[d as usize][x]).abs() < 1e-9);
                    }
                }
            }
        }
    }
}
