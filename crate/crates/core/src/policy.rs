//! Access policies and the mean-field channel quantities they induce.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::source::SourceParams;

/// Transmit probabilities conditioned on the (previous, current) source
/// state pair, stored as `[l00, l01, l10, l11]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct AccessPolicy([f64; 4]);

impl AccessPolicy {
    pub fn new(l00: f64, l01: f64, l10: f64, l11: f64) -> Result<Self> {
        Self::from_array([l00, l01, l10, l11])
    }

    pub fn from_array(l: [f64; 4]) -> Result<Self> {
        const NAMES: [&str; 4] = ["l00", "l01", "l10", "l11"];
        for (v, name) in l.iter().zip(NAMES) {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must lie in [0, 1], got {v}"),
                });
            }
        }
        Ok(Self(l))
    }

    /// Every node transmits with probability `1/m` regardless of the source.
    pub fn random(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: "must be at least 1".into(),
            });
        }
        let p = 1.0 / m as f64;
        Ok(Self([p; 4]))
    }

    /// Transmit exactly when the source changes state.
    pub fn reactive() -> Self {
        Self([0.0, 1.0, 1.0, 0.0])
    }

    /// Reactive policy topped up with a persistence probability `c` (applied
    /// to both `l00` and `l11`) so that the channel load is one packet per slot.
    pub fn load_one(source: &SourceParams, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: "must be at least 1".into(),
            });
        }
        let base = source.transition_rate();
        let base_load = m as f64 * base;
        if base_load > 1.0 + 1e-12 {
            return Err(Error::LoadInfeasible {
                target: 1.0,
                reason: format!("reactive base load {base_load} already exceeds 1"),
            });
        }
        let c = ((1.0 / m as f64 - base) / (1.0 - base)).clamp(0.0, 1.0);
        Ok(Self([c, 1.0, 1.0, c]))
    }

    #[inline]
    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }

    #[inline]
    pub fn get(&self, prev: usize, cur: usize) -> f64 {
        self.0[2 * prev + cur]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    /// Swap the roles of states 0 and 1.
    pub fn mirrored(&self) -> Self {
        let [a, b, c, d] = self.0;
        Self([d, c, b, a])
    }
}

impl fmt::Display for AccessPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "[{a}, {b}, {c}, {d}]")
    }
}

/// Stationary weights `w` such that the mean access probability is `w . l`.
pub fn access_weights(source: &SourceParams) -> [f64; 4] {
    let pi = source.stationary();
    let (a, b) = (source.alpha(), source.beta());
    [
        pi.pi0 * (1.0 - a),
        pi.pi0 * a,
        pi.pi1 * b,
        pi.pi1 * (1.0 - b),
    ]
}

/// Average per-slot transmit probability of a node in stationary conditions.
pub fn mean_access_probability(source: &SourceParams, policy: &AccessPolicy) -> f64 {
    let w = access_weights(source);
    let l = policy.as_array();
    let v: f64 = w.iter().zip(l.iter()).map(|(w, l)| w * l).sum();
    v.clamp(0.0, 1.0)
}

/// A network of `m` nodes with identical sources and policies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    m: usize,
    pub source: SourceParams,
    pub policy: AccessPolicy,
}

impl NetworkConfig {
    pub fn new(m: usize, source: SourceParams, policy: AccessPolicy) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: "must be at least 1".into(),
            });
        }
        Ok(Self { m, source, policy })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn with_policy(&self, policy: AccessPolicy) -> Self {
        Self { policy, ..*self }
    }

    pub fn mean_access_probability(&self) -> f64 {
        mean_access_probability(&self.source, &self.policy)
    }

    /// Success probability of a transmitted packet, `(1 - lbar)^(m-1)`,
    /// treating the other `m-1` nodes as independent Bernoulli transmitters.
    pub fn success_probability(&self) -> f64 {
        let lbar = self.mean_access_probability();
        (1.0 - lbar).powi((self.m - 1) as i32)
    }

    /// Expected packets per slot, `m * lbar`.
    pub fn channel_load(&self) -> f64 {
        self.m as f64 * self.mean_access_probability()
    }
}
