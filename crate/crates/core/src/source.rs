//! Two-state discrete-time Markov source.
//!
//! State 0 moves to 1 with probability `alpha` per slot, state 1 moves to 0
//! with probability `beta`. Both must lie in the open interval (0, 1), which
//! keeps the chain ergodic and aperiodic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

/// `-p log2 p`, zero at `p = 0`.
#[inline]
pub(crate) fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Transition probabilities of a monitored source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    alpha: f64,
    beta: f64,
}

/// Stationary law of a [`SourceParams`] chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryLaw {
    pub pi0: f64,
    pub pi1: f64,
}

impl SourceParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_open_unit("alpha", alpha)?;
        check_open_unit("beta", beta)?;
        Ok(Self { alpha, beta })
    }

    /// Symmetric source with `alpha = beta = p`.
    pub fn symmetric(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn stationary(&self) -> StationaryLaw {
        let pi0 = self.beta / (self.alpha + self.beta);
        StationaryLaw {
            pi0,
            pi1: 1.0 - pi0,
        }
    }

    /// Ratio `alpha / beta`; 1 for symmetric sources.
    pub fn asymmetry_factor(&self) -> f64 {
        self.alpha / self.beta
    }

    /// Stationary entropy `H(X)` in bits.
    pub fn entropy(&self) -> f64 {
        binary_entropy(self.stationary().pi0)
    }

    /// Mean number of state transitions per slot, `pi0 alpha + pi1 beta`.
    ///
    /// Written as `2 alpha beta / (alpha + beta)`, which is the same quantity.
    pub fn transition_rate(&self) -> f64 {
        2.0 * self.alpha * self.beta / (self.alpha + self.beta)
    }

    /// Source parameters with asymmetry `eta` such that `m` independent
    /// sources perform `budget` state transitions per slot on average.
    ///
    /// From `m * 2 alpha beta / (alpha + beta) = budget` and `alpha = eta beta`:
    /// `beta = budget (1 + eta) / (2 m eta)`.
    pub fn from_budget(eta: f64, m: usize, budget: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("must be positive, got {eta}"),
            });
        }
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::InvalidParameter {
                name: "budget",
                reason: format!("must be positive, got {budget}"),
            });
        }
        if m == 0 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: "must be at least 1".into(),
            });
        }
        let beta = budget * (1.0 + eta) / (2.0 * m as f64 * eta);
        let alpha = eta * beta;
        Self::new(alpha, beta).map_err(|_| Error::BudgetInfeasible {
            eta,
            m,
            budget,
            alpha,
            beta,
        })
    }
}

fn check_open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must lie in (0, 1), got {v}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn stationary_examples() {
        let s = SourceParams::new(0.02, 0.02).unwrap().stationary();
        assert_eq!((s.pi0, s.pi1), (0.5, 0.5));
        let s = SourceParams::new(0.1, 0.01).unwrap().stationary();
        assert_relative_eq!(s.pi0, 0.01 / 0.11, max_relative = 1e-15);
        assert_relative_eq!(s.pi1, 0.1 / 0.11, max_relative = 1e-15);
        let s = SourceParams::new(0.5, 0.5).unwrap().stationary();
        assert_eq!((s.pi0, s.pi1), (0.5, 0.5));
    }

    #[test]
    fn asymmetry_examples() {
        assert_eq!(
            SourceParams::new(0.02, 0.02).unwrap().asymmetry_factor(),
            1.0
        );
        assert_relative_eq!(
            SourceParams::new(0.1, 0.01).unwrap().asymmetry_factor(),
            10.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            SourceParams::new(0.01, 0.1).unwrap().asymmetry_factor(),
            0.1,
            max_relative = 1e-14
        );
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(SourceParams::new(0.02, 0.02).unwrap().entropy(), 1.0);
        assert_relative_eq!(
            SourceParams::new(0.1, 0.01).unwrap().entropy(),
            0.4394969869215134,
            max_relative = 1e-12
        );
        assert_eq!(SourceParams::new(0.37, 0.37).unwrap().entropy(), 1.0);
    }

    #[test]
    fn rejects_boundary_values() {
        assert!(SourceParams::new(0.0, 0.5).is_err());
        assert!(SourceParams::new(0.5, 1.0).is_err());
        assert!(SourceParams::new(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn budget_examples() {
        let s = SourceParams::from_budget(1.0, 50, 0.8).unwrap();
        assert_relative_eq!(s.alpha(), 0.016, max_relative = 1e-14);
        assert_relative_eq!(s.beta(), 0.016, max_relative = 1e-14);

        assert!(matches!(
            SourceParams::from_budget(1.0, 1, 2.5),
            Err(Error::BudgetInfeasible { .. })
        ));

        let s = SourceParams::from_budget(10.0, 50, 0.8).unwrap();
        assert_relative_eq!(s.beta(), 0.0088, max_relative = 1e-14);
        assert_relative_eq!(s.alpha(), 0.088, max_relative = 1e-14);
        assert_relative_eq!(50.0 * s.transition_rate(), 0.8, max_relative = 1e-12);
    }

    #[test]
    fn binary_entropy_edges() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_eq!(binary_entropy(0.5), 1.0);
    }

    proptest! {
        #[test]
        fn stationary_sums_to_one(a in 1e-6f64..0.999_999, b in 1e-6f64..0.999_999) {
            let s = SourceParams::new(a, b).unwrap().stationary();
            prop_assert!((s.pi0 + s.pi1 - 1.0).abs() <= f64::EPSILON);
            prop_assert!(s.pi0 > 0.0 && s.pi0 < 1.0);
        }

        #[test]
        fn entropy_max_only_when_symmetric(a in 1e-4f64..0.9999, b in 1e-4f64..0.9999) {
            let src = SourceParams::new(a, b).unwrap();
            let h = src.entropy();
            prop_assert!(h <= 1.0 && h > 0.0);
            if (a - b).abs() > 1e-3 {
                prop_assert!(h < 1.0);
            }
        }

        #[test]
        fn budget_roundtrip(eta in 0.05f64..50.0, m in 1usize..500, budget in 1e-3f64..1.0) {
            if let Ok(s) = SourceParams::from_budget(eta, m, budget) {
                let back = m as f64 * s.transition_rate();
                prop_assert!(((back - budget) / budget).abs() <= 1e-12);
                prop_assert!(((s.asymmetry_factor() - eta) / eta).abs() <= 1e-12);
            }
        }
    }
}
