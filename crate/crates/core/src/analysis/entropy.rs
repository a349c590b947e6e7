use serde::{Deserialize, Serialize};

use super::chain::{Row, TerminatingChain};
use crate::error::{Error, Result};
use crate::policy::NetworkConfig;
use crate::source::binary_entropy;

/// Law of the current source state given the AoI and the estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalSourceLaw {
    pub p0: f64,
    pub p1: f64,
}

impl ConditionalSourceLaw {
    pub(crate) fn from_row(v: Row) -> Option<Self> {
        let s = v[0] + v[1];
        if s > 0.0 && s.is_finite() {
            let p0 = v[0] / s;
            Some(Self { p0, p1: 1.0 - p0 })
        } else {
            None
        }
    }

    pub fn get(&self, x: usize) -> f64 {
        if x == 0 {
            self.p0
        } else {
            self.p1
        }
    }

    pub fn entropy(&self) -> f64 {
        binary_entropy(self.p0)
    }
}

#[inline]
pub(crate) fn unit_row(x: usize) -> Row {
    if x == 0 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    }
}

fn check_state(xhat: usize) -> Result<()> {
    if xhat > 1 {
        return Err(Error::InvalidParameter {
            name: "xhat",
            reason: format!("must be 0 or 1, got {xhat}"),
        });
    }
    Ok(())
}

/// `p(x | delta, xhat) = e_xhat A^delta e_x / e_xhat A^delta 1`.
///
/// The row is renormalized at every step so that large `delta` cannot
/// underflow; the ratio is unaffected.
pub fn conditional_source_law(
    chain: &TerminatingChain,
    delta: u64,
    xhat: usize,
) -> Result<ConditionalSourceLaw> {
    check_state(xhat)?;
    let mut v = unit_row(xhat);
    for _ in 0..delta {
        v = chain.step(v);
        let s = v[0] + v[1];
        if s <= 0.0 {
            return Err(Error::UnreachableCondition { delta, xhat });
        }
        v = [v[0] / s, v[1] / s];
    }
    ConditionalSourceLaw::from_row(v).ok_or(Error::UnreachableCondition { delta, xhat })
}

/// Receiver uncertainty `h(delta, xhat)` in bits.
pub fn instantaneous_entropy(chain: &TerminatingChain, delta: u64, xhat: usize) -> Result<f64> {
    conditional_source_law(chain, delta, xhat).map(|l| l.entropy())
}

/// One slot of an entropy timeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimelinePoint {
    pub slot: u64,
    pub delta: u64,
    pub xhat: usize,
    pub entropy: f64,
}

/// Evaluate `h(delta, xhat)` slot by slot for a given sequence of deliveries
/// `(slot, state)`, from the first delivery up to (excluding) `end_slot`.
pub fn entropy_timeline(
    config: &NetworkConfig,
    receptions: &[(u64, usize)],
    end_slot: u64,
) -> Result<Vec<TimelinePoint>> {
    if receptions.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidParameter {
            name: "receptions",
            reason: "slots must be strictly increasing".into(),
        });
    }
    for &(_, x) in receptions {
        check_state(x)?;
    }
    let chain = TerminatingChain::build(config)?;
    let Some(&(start, _)) = receptions.first() else {
        return Ok(Vec::new());
    };

    let mut out = Vec::with_capacity(end_slot.saturating_sub(start) as usize);
    let mut next = receptions.iter().peekable();
    let mut v = [0.0; 2];
    let mut delta = 0;
    let mut xhat = 0;
    for slot in start..end_slot {
        if let Some(&&(s, x)) = next.peek() {
            if s == slot {
                next.next();
                v = unit_row(x);
                xhat = x;
                delta = 0;
                out.push(TimelinePoint {
                    slot,
                    delta,
                    xhat,
                    entropy: 0.0,
                });
                continue;
            }
        }
        delta += 1;
        let w = chain.step(v);
        let law =
            ConditionalSourceLaw::from_row(w).ok_or(Error::UnreachableCondition { delta, xhat })?;
        v = [law.p0, law.p1];
        out.push(TimelinePoint {
            slot,
            delta,
            xhat,
            entropy: law.entropy(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::AccessPolicy;
    use crate::source::SourceParams;

    fn config(m: usize, a: f64, b: f64, p: AccessPolicy) -> NetworkConfig {
        NetworkConfig::new(m, SourceParams::new(a, b).unwrap(), p).unwrap()
    }

    fn fig2() -> NetworkConfig {
        config(50, 0.1, 0.01, AccessPolicy::random(50).unwrap())
    }

    #[test]
    fn zero_age_is_certain() {
        let chain = TerminatingChain::build(&fig2()).unwrap();
        for x in 0..2 {
            let l = conditional_source_law(&chain, 0, x).unwrap();
            assert_eq!(l.get(x), 1.0);
            assert_eq!(instantaneous_entropy(&chain, 0, x).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_node_reactive_never_doubts() {
        let chain =
            TerminatingChain::build(&config(1, 0.1, 0.01, AccessPolicy::reactive())).unwrap();
        for d in [0, 1, 7, 500, 10_000] {
            let l = conditional_source_law(&chain, d, 0).unwrap();
            assert_eq!((l.p0, l.p1), (1.0, 0.0));
            assert_eq!(instantaneous_entropy(&chain, d, 1).unwrap(), 0.0);
        }
    }

    #[test]
    fn large_age_forgets_estimate() {
        let chain = TerminatingChain::build(&fig2()).unwrap();
        let a = conditional_source_law(&chain, 10_000, 0).unwrap();
        let b = conditional_source_law(&chain, 10_000, 1).unwrap();
        assert!((a.p0 - b.p0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_random_tends_to_one_bit() {
        let chain =
            TerminatingChain::build(&config(50, 0.02, 0.02, AccessPolicy::random(50).unwrap()))
                .unwrap();
        let h = instantaneous_entropy(&chain, 10_000, 0).unwrap();
        assert!((h - 1.0).abs() < 1e-6, "h = {h}");
    }

    #[test]
    fn unreachable_pair_is_an_error() {
        // Row 0 is absorbed with certainty: delta >= 1 after xhat = 0 never occurs.
        let chain =
            TerminatingChain::from_parts([[0.0, 0.0], [0.2, 0.3]], [1.0, 0.5], 1.0).unwrap();
        assert_eq!(
            conditional_source_law(&chain, 1, 0),
            Err(Error::UnreachableCondition { delta: 1, xhat: 0 })
        );
        assert!(conditional_source_law(&chain, 3, 1).is_ok());
    }

    #[test]
    fn timeline_relaxes_to_source_entropy() {
        let cfg = fig2();
        let h_inf = cfg.source.entropy();
        let t = entropy_timeline(&cfg, &[(0, 1)], 3000).unwrap();
        assert_eq!(t[0].entropy, 0.0);
        let last = t.last().unwrap().entropy;
        assert!((last - h_inf).abs() < 1e-6, "last = {last}");
        // from the common state the uncertainty rises monotonically
        assert!(t
            .windows(2)
            .take(200)
            .all(|w| w[1].entropy >= w[0].entropy - 1e-15));
    }

    #[test]
    fn timeline_overshoots_after_rare_state() {
        let cfg = fig2();
        let h_inf = cfg.source.entropy();
        let t = entropy_timeline(&cfg, &[(0, 0)], 3000).unwrap();
        let peak = t.iter().map(|p| p.entropy).fold(0.0, f64::max);
        assert!(peak > h_inf + 0.1, "peak = {peak}");
        assert!((t.last().unwrap().entropy - h_inf).abs() < 1e-6);
    }

    #[test]
    fn timeline_with_reception_every_slot_is_flat_zero() {
        let recs: Vec<_> = (0..100u64).map(|s| (s, (s % 2) as usize)).collect();
        let t = entropy_timeline(&fig2(), &recs, 100).unwrap();
        assert_eq!(t.len(), 100);
        assert!(t.iter().all(|p| p.entropy == 0.0 && p.delta == 0));
    }

    #[test]
    fn timeline_resets_and_rejects_disorder() {
        let t = entropy_timeline(&fig2(), &[(5, 1), (20, 0)], 40).unwrap();
        assert_eq!(t[0].slot, 5);
        assert_eq!(t[15].delta, 0);
        assert_eq!(t[15].xhat, 0);
        assert_eq!(t[14].delta, 14);
        assert!(entropy_timeline(&fig2(), &[(5, 1), (5, 0)], 40).is_err());
    }
}
