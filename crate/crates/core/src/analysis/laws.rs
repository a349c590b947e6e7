use serde::{Deserialize, Serialize};

use super::chain::{Row, TerminatingChain};
use super::entropy::unit_row;
use crate::error::{Error, Result};
use crate::policy::NetworkConfig;
use crate::source::binary_entropy;

/// Default truncation tolerance on residual probability mass.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Hard cap on the number of explicit iteration steps.
pub const MAX_HORIZON: u64 = 20_000_000;

/// Drift bound below which the conditional law is considered settled.
const SETTLE_TOLERANCE: f64 = 1e-12;

fn check_tolerance(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "tolerance",
            reason: format!("must lie in (0, 1), got {tol}"),
        })
    }
}

fn check_horizon(chain: &TerminatingChain, tol: f64) -> Result<()> {
    let needed = chain.steps_to_mass(tol);
    if needed > MAX_HORIZON as f64 {
        Err(Error::HorizonExceeded {
            needed,
            limit: MAX_HORIZON,
        })
    } else {
        Ok(())
    }
}

#[inline]
fn dot(v: Row, w: Row) -> f64 {
    v[0] * w[0] + v[1] * w[1]
}

/// Law of the time `W` between two deliveries from the reference node,
/// conditioned on the estimate installed by the first one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterRefreshLaw {
    /// `pmf[x][w - 1] = p(w | x)` for `w = 1..=w_max`.
    pub pmf: [Vec<f64>; 2],
    /// `E[W | x]` from the fundamental matrix.
    pub mean: [f64; 2],
    /// `P(W > w_max | x)`.
    pub tail_mass: [f64; 2],
}

impl InterRefreshLaw {
    pub fn w_max(&self) -> usize {
        self.pmf[0].len()
    }

    /// `sum_w w p(w | x)` over the truncated support.
    pub fn truncated_mean(&self, x: usize) -> f64 {
        self.pmf[x]
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum()
    }

    /// Upper bound on `E[W|x] - truncated_mean(x)`:
    /// `w_max S(w_max) + sum_{k >= w_max} S(k) <= tail (w_max + max E)`.
    pub fn mean_truncation_bound(&self, x: usize) -> f64 {
        let emax = self.mean[0].max(self.mean[1]);
        self.tail_mass[x] * (self.w_max() as f64 + emax)
    }
}

/// Discrete phase-type law `p(w | x) = e_x A^{w-1} a_d`, iterated until the
/// surviving mass of both rows drops below `tolerance`.
pub fn inter_refresh_law(chain: &TerminatingChain, tolerance: f64) -> Result<InterRefreshLaw> {
    check_tolerance(tolerance)?;
    check_horizon(chain, tolerance)?;
    tabulate_inter_refresh(chain, MAX_HORIZON, tolerance).and_then(|law| {
        if law.tail_mass.iter().all(|&s| s < tolerance) {
            Ok(law)
        } else {
            Err(Error::HorizonExceeded {
                needed: chain.steps_to_mass(tolerance),
                limit: MAX_HORIZON,
            })
        }
    })
}

/// The first `horizon` terms of the inter-refresh law, whatever mass is
/// left over; see [`InterRefreshLaw::mean_truncation_bound`].
pub fn inter_refresh_law_truncated(
    chain: &TerminatingChain,
    horizon: u64,
) -> Result<InterRefreshLaw> {
    if horizon == 0 || horizon > MAX_HORIZON {
        return Err(Error::InvalidParameter {
            name: "horizon",
            reason: format!("must be in 1..={MAX_HORIZON}, got {horizon}"),
        });
    }
    tabulate_inter_refresh(chain, horizon, 0.0)
}

fn tabulate_inter_refresh(
    chain: &TerminatingChain,
    horizon: u64,
    tolerance: f64,
) -> Result<InterRefreshLaw> {
    let mean = chain.mean_absorption_times()?;
    let d = chain.absorption();
    let mut v = [unit_row(0), unit_row(1)];
    let mut pmf = [Vec::new(), Vec::new()];
    loop {
        for x in 0..2 {
            pmf[x].push(dot(v[x], d));
            v[x] = chain.step(v[x]);
        }
        let surv = [v[0][0] + v[0][1], v[1][0] + v[1][1]];
        let settled = surv[0] < tolerance && surv[1] < tolerance;
        if settled || surv == [0.0, 0.0] || pmf[0].len() as u64 >= horizon {
            return Ok(InterRefreshLaw {
                pmf,
                mean,
                tail_mass: surv,
            });
        }
    }
}

/// Truncated law of the AoI conditioned on the estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoiLaw {
    /// `pmf[x][delta] = p(delta | x)` for `delta = 0..=delta_max`.
    pub pmf: [Vec<f64>; 2],
    /// `P(Delta > delta_max | x)`, computed exactly from the fundamental matrix.
    pub tail_mass: [f64; 2],
}

/// `p(delta | x) = P(W > delta | x) / E[W | x]`: a uniformly chosen slot
/// falls in an inter-refresh period with probability proportional to its
/// length, and is equally likely to sit at any age within it.
pub fn aoi_law_given_estimate(chain: &TerminatingChain, tolerance: f64) -> Result<AoiLaw> {
    check_tolerance(tolerance)?;
    let mean = chain.mean_absorption_times()?;
    check_horizon(chain, tolerance)?;
    let mut v = [unit_row(0), unit_row(1)];
    let mut pmf = [Vec::new(), Vec::new()];
    loop {
        for x in 0..2 {
            pmf[x].push((v[x][0] + v[x][1]) / mean[x]);
            v[x] = chain.step(v[x]);
        }
        // sum_{k >= K} S(k) = e_x A^K (I - A)^{-1} 1
        let tail = [dot(v[0], mean) / mean[0], dot(v[1], mean) / mean[1]];
        if tail[0] < tolerance && tail[1] < tolerance {
            return Ok(AoiLaw {
                pmf,
                tail_mass: tail,
            });
        }
        if pmf[0].len() as u64 >= MAX_HORIZON {
            return Err(Error::HorizonExceeded {
                needed: chain.steps_to_mass(tolerance),
                limit: MAX_HORIZON,
            });
        }
    }
}

/// Stationary law of the receiver estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateLaw {
    /// `p(xhat)`.
    pub p: [f64; 2],
    /// Fraction of inter-refresh periods that install each estimate value.
    pub c: [f64; 2],
}

/// `p(xhat) = c_xhat E[W|xhat] / sum_x c_x E[W|x]`, where `c_0` is the share
/// of deliveries carrying state 0.
pub fn estimate_law(config: &NetworkConfig, chain: &TerminatingChain) -> Result<EstimateLaw> {
    let lbar = config.mean_access_probability();
    if lbar <= 0.0 {
        return Err(Error::DegeneratePolicy);
    }
    let mean = chain.mean_absorption_times()?;
    let pi = config.source.stationary();
    let (al, be) = (config.source.alpha(), config.source.beta());
    let l = config.policy;
    // The success probability multiplies both numerator and denominator and
    // is cancelled here so that an underflowing p_s cannot produce 0/0.
    let c0 =
        ((pi.pi0 * (1.0 - al) * l.get(0, 0) + pi.pi1 * be * l.get(1, 0)) / lbar).clamp(0.0, 1.0);
    let c = [c0, 1.0 - c0];
    let w = [c[0] * mean[0], c[1] * mean[1]];
    let z = w[0] + w[1];
    Ok(EstimateLaw {
        p: [w[0] / z, w[1] / z],
        c,
    })
}

/// Knobs of the joint-law iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLawOptions {
    /// Residual mass allowed outside the explicit table and the settled tail.
    pub tolerance: f64,
    /// Explicit table rows to produce at least, regardless of convergence.
    pub min_horizon: u64,
}

impl Default for JointLawOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            min_horizon: 0,
        }
    }
}

impl JointLawOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

/// Probability mass beyond the explicit table for one estimate value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCell {
    /// `P(Delta > delta_max, Xhat = x)`.
    pub mass: f64,
    /// Entropy assigned to the whole tail: the entropy at the first
    /// excluded age.
    pub entropy: f64,
    /// Bound on `|h(delta, x) - entropy|` over the tail; 1 when the
    /// conditional law had not settled when iteration stopped.
    pub entropy_bound: f64,
}

/// Joint law of (AoI, estimate) with the per-cell receiver uncertainty.
///
/// Ages `0..=delta_max` are tabulated explicitly. Beyond that, either the
/// residual mass is below the tolerance, or the conditional source law has
/// stopped moving, in which case the remaining mass (computed exactly from
/// the fundamental matrix) carries the settled entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointAoiEstimateLaw {
    pub delta_max: u64,
    /// `table[delta][x] = p(delta, x)`.
    pub table: Vec<[f64; 2]>,
    /// `entropy_table[delta][x] = h(delta, x)`.
    pub entropy_table: Vec<[f64; 2]>,
    pub tail: [TailCell; 2],
    pub estimate: EstimateLaw,
    pub mean_inter_refresh: [f64; 2],
}

impl JointAoiEstimateLaw {
    /// Total mass beyond `delta_max`.
    pub fn tail_mass(&self) -> f64 {
        self.tail[0].mass + self.tail[1].mass
    }

    pub fn table_mass(&self) -> f64 {
        self.table.iter().map(|r| r[0] + r[1]).sum()
    }

    /// `p(delta, x)` if tabulated.
    pub fn mass(&self, delta: u64, x: usize) -> Option<f64> {
        self.table.get(delta as usize).map(|r| r[x])
    }

    /// Average conditional entropy and a bound on its error.
    pub fn average_entropy(&self) -> AverageEntropy {
        let body: f64 = self
            .table
            .iter()
            .zip(&self.entropy_table)
            .map(|(p, h)| p[0] * h[0] + p[1] * h[1])
            .sum();
        let tail: f64 = self.tail.iter().map(|t| t.mass * t.entropy).sum();
        let error_bound = self.tail.iter().map(|t| t.mass * t.entropy_bound).sum();
        AverageEntropy {
            bits: body + tail,
            error_bound,
            tail_mass: self.tail_mass(),
        }
    }

    /// `P(h(Delta, Xhat) <= zeta)` for each threshold. Tail mass is counted
    /// with its assigned entropy; `band` is the tail mass whose entropy
    /// interval straddles `zeta`, i.e. whose side of the threshold is
    /// uncertain.
    pub fn entropy_cdf(&self, thresholds: &[f64]) -> Result<Vec<CdfPoint>> {
        if thresholds.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter {
                name: "thresholds",
                reason: "must be sorted ascending".into(),
            });
        }
        let mut cells: Vec<(f64, f64)> = self
            .table
            .iter()
            .zip(&self.entropy_table)
            .flat_map(|(p, h)| [(h[0], p[0]), (h[1], p[1])])
            .filter(|c| c.1 > 0.0)
            .collect();
        for t in &self.tail {
            cells.push((t.entropy, t.mass));
        }
        cells.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = Vec::with_capacity(thresholds.len());
        let mut acc = 0.0;
        let mut i = 0;
        for &zeta in thresholds {
            while i < cells.len() && cells[i].0 <= zeta {
                acc += cells[i].1;
                i += 1;
            }
            let band = self
                .tail
                .iter()
                .filter(|t| t.entropy_bound > 0.0 && (t.entropy - zeta).abs() <= t.entropy_bound)
                .map(|t| t.mass)
                .sum();
            out.push(CdfPoint {
                zeta,
                probability: acc.min(1.0),
                band,
            });
        }
        Ok(out)
    }
}

/// Average conditional entropy `H(X | Delta, Xhat)` with rigorous slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageEntropy {
    pub bits: f64,
    /// `|true - bits| <= error_bound`.
    pub error_bound: f64,
    pub tail_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub zeta: f64,
    pub probability: f64,
    pub band: f64,
}

/// Build the joint (AoI, estimate) law of the reference node.
pub fn joint_law(config: &NetworkConfig, options: JointLawOptions) -> Result<JointAoiEstimateLaw> {
    check_tolerance(options.tolerance)?;
    let chain = TerminatingChain::build(config)?;
    joint_law_for_chain(config, &chain, options)
}

fn joint_law_for_chain(
    config: &NetworkConfig,
    chain: &TerminatingChain,
    options: JointLawOptions,
) -> Result<JointAoiEstimateLaw> {
    let tol = options.tolerance;
    let mean = chain.mean_absorption_times()?;
    let estimate = estimate_law(config, chain)?;
    let ratio = chain.mixing_ratio();
    let settle_steps = if ratio < 1.0 {
        (1.0 / SETTLE_TOLERANCE).ln() / (1.0 - ratio)
    } else {
        f64::INFINITY
    };
    let needed = chain
        .steps_to_mass(tol)
        .min(settle_steps)
        .max(options.min_horizon as f64);
    if needed > MAX_HORIZON as f64 {
        return Err(Error::HorizonExceeded {
            needed,
            limit: MAX_HORIZON,
        });
    }

    let mut v = [unit_row(0), unit_row(1)];
    let mut p0 = [1.0, 0.0];
    let mut table = Vec::new();
    let mut entropy_table = Vec::new();
    loop {
        let mut row = [0.0; 2];
        let mut hrow = [0.0; 2];
        for x in 0..2 {
            let s = v[x][0] + v[x][1];
            row[x] = estimate.p[x] * s / mean[x];
            if s > 0.0 {
                p0[x] = v[x][0] / s;
                hrow[x] = binary_entropy(p0[x]);
            }
        }
        table.push(row);
        entropy_table.push(hrow);
        let k = table.len() as u64;

        let next = [chain.step(v[0]), chain.step(v[1])];
        let mut tail = [TailCell {
            mass: 0.0,
            entropy: 0.0,
            entropy_bound: 1.0,
        }; 2];
        let mut done = k >= options.min_horizon;
        for x in 0..2 {
            let s = next[x][0] + next[x][1];
            let mass = estimate.p[x] * dot(next[x], mean) / mean[x];
            let (q0, drift) = if s > 0.0 {
                let q0 = next[x][0] / s;
                (q0, (q0 - p0[x]).abs())
            } else {
                (p0[x], 0.0)
            };
            let on_vertex = q0 == 0.0 || q0 == 1.0;
            let bound = if drift == 0.0 && (on_vertex || s == 0.0) {
                Some(0.0)
            } else if ratio < 1.0 {
                let dev = 2.0 * drift / (1.0 - ratio);
                (dev <= SETTLE_TOLERANCE).then(|| binary_entropy(dev.min(0.5)))
            } else {
                None
            };
            tail[x] = TailCell {
                mass,
                entropy: binary_entropy(q0),
                entropy_bound: bound.unwrap_or(1.0),
            };
            done &= bound.is_some() || mass < 0.5 * tol;
        }
        if done {
            return Ok(JointAoiEstimateLaw {
                delta_max: k - 1,
                table,
                entropy_table,
                tail,
                estimate,
                mean_inter_refresh: mean,
            });
        }
        if k >= MAX_HORIZON {
            return Err(Error::HorizonExceeded {
                needed,
                limit: MAX_HORIZON,
            });
        }
        v = next;
    }
}

/// `H(X | Delta, Xhat)` for `config`.
pub fn average_conditional_entropy(
    config: &NetworkConfig,
    tolerance: f64,
) -> Result<AverageEntropy> {
    joint_law(config, JointLawOptions::with_tolerance(tolerance)).map(|j| j.average_entropy())
}

/// CDF of the instantaneous uncertainty at the given thresholds.
pub fn entropy_cdf(
    config: &NetworkConfig,
    tolerance: f64,
    thresholds: &[f64],
) -> Result<Vec<CdfPoint>> {
    joint_law(config, JointLawOptions::with_tolerance(tolerance))?.entropy_cdf(thresholds)
}
