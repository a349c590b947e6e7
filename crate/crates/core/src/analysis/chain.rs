use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::NetworkConfig;

/// Row vector over the two transient states.
pub type Row = [f64; 2];

/// Transient block `A` and absorption vector `a_d` of the chain that tracks
/// the reference source between two deliveries.
///
/// Row `i` of `A` holds the probabilities of moving from source state `i`
/// to each source state without an update being delivered; `a_d[i]` is the
/// probability of a delivery (absorption) in the next slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminatingChain {
    a: [[f64; 2]; 2],
    absorb: [f64; 2],
    success_probability: f64,
}

impl TerminatingChain {
    /// Build the chain for the reference node of `config`, using the
    /// mean-field success probability.
    pub fn build(config: &NetworkConfig) -> Result<Self> {
        let ps = config.success_probability();
        let (al, be) = (config.source.alpha(), config.source.beta());
        let l = config.policy;
        let a = [
            [
                (1.0 - al) * (1.0 - l.get(0, 0) * ps),
                al * (1.0 - l.get(0, 1) * ps),
            ],
            [
                be * (1.0 - l.get(1, 0) * ps),
                (1.0 - be) * (1.0 - l.get(1, 1) * ps),
            ],
        ];
        let absorb = [
            (al * l.get(0, 1) + (1.0 - al) * l.get(0, 0)) * ps,
            (be * l.get(1, 0) + (1.0 - be) * l.get(1, 1)) * ps,
        ];
        Self::from_parts(a, absorb, ps)
    }

    /// Build from an explicit transient block; rows of `a` plus `absorb`
    /// must sum to one.
    pub fn from_parts(
        a: [[f64; 2]; 2],
        absorb: [f64; 2],
        success_probability: f64,
    ) -> Result<Self> {
        for i in 0..2 {
            let row_ok = a[i]
                .iter()
                .chain(std::iter::once(&absorb[i]))
                .all(|v| v.is_finite() && *v >= 0.0);
            if !row_ok {
                return Err(Error::InvalidParameter {
                    name: "chain",
                    reason: format!("row {i} has a negative or non-finite entry"),
                });
            }
            let sum = a[i][0] + a[i][1] + absorb[i];
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidParameter {
                    name: "chain",
                    reason: format!("row {i} sums to {sum}"),
                });
            }
        }
        if absorb == [0.0, 0.0] {
            return Err(Error::DegeneratePolicy);
        }
        let chain = Self {
            a,
            absorb,
            success_probability,
        };
        // For a nonnegative A, spectral radius < 1 iff I - A is a nonsingular
        // M-matrix: positive diagonal and positive determinant.
        let det = chain.fundamental_det();
        if !(det > 0.0 && det.is_finite()) || chain.leave(0) <= 0.0 || chain.leave(1) <= 0.0 {
            return Err(Error::SingularFundamentalMatrix { det });
        }
        Ok(chain)
    }

    #[inline]
    pub fn transient(&self) -> [[f64; 2]; 2] {
        self.a
    }

    #[inline]
    pub fn absorption(&self) -> [f64; 2] {
        self.absorb
    }

    #[inline]
    pub fn success_probability(&self) -> f64 {
        self.success_probability
    }

    /// `v A` for a row vector `v`.
    #[inline]
    pub fn step(&self, v: Row) -> Row {
        [
            v[0] * self.a[0][0] + v[1] * self.a[1][0],
            v[0] * self.a[0][1] + v[1] * self.a[1][1],
        ]
    }

    /// Probability of leaving state `i` for anything but itself, `1 - A[i][i]`,
    /// computed without cancellation.
    #[inline]
    fn leave(&self, i: usize) -> f64 {
        self.a[i][1 - i] + self.absorb[i]
    }

    /// `det(I - A)` expanded so that every term is nonnegative.
    pub fn fundamental_det(&self) -> f64 {
        let [a0, a1] = self.absorb;
        self.a[0][1] * a1 + a0 * self.a[1][0] + a0 * a1
    }

    /// Expected absorption time from each state, `(I - A)^{-1} 1`.
    pub fn mean_absorption_times(&self) -> Result<Row> {
        let det = self.fundamental_det();
        let e = [
            (self.leave(1) + self.a[0][1]) / det,
            (self.leave(0) + self.a[1][0]) / det,
        ];
        if det > 0.0 && e.iter().all(|v| v.is_finite() && *v >= 1.0 - 1e-12) {
            Ok(e)
        } else {
            Err(Error::SingularFundamentalMatrix { det })
        }
    }

    /// Real eigenvalues `(l1, l2)` of `A`, `l1 >= |l2|`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let [[p, q], [r, s]] = self.a;
        let root = ((p - s) * (p - s) + 4.0 * q * r).sqrt();
        (0.5 * (p + s + root), 0.5 * (p + s - root))
    }

    /// Spectral gap `1 - rho(A)`, via `det(I - A) / (1 - l2)`.
    pub fn spectral_gap(&self) -> f64 {
        let [[p, q], [r, s]] = self.a;
        let root = ((p - s) * (p - s) + 4.0 * q * r).sqrt();
        2.0 * self.fundamental_det() / (self.leave(0) + self.leave(1) + root)
    }

    /// Ratio `|l2| / l1`: how fast the normalized row `e_x A^k` forgets its
    /// starting point. Equal to 1 for defective or reducible-with-ties blocks.
    pub fn mixing_ratio(&self) -> f64 {
        let (l1, l2) = self.eigenvalues();
        if l1 <= 0.0 {
            0.0
        } else {
            (l2.abs() / l1).min(1.0)
        }
    }

    /// Rough number of steps before the transient mass drops below `tol`.
    pub fn steps_to_mass(&self, tol: f64) -> f64 {
        (1.0 / tol).ln() / self.spectral_gap().max(f64::MIN_POSITIVE)
    }
}
