//! Side-by-side comparison of the analytical laws with an exact simulation.

use serde::{Deserialize, Serialize};

use crate::analysis::{
    average_conditional_entropy, conditional_source_law, joint_law, JointLawOptions,
    TerminatingChain, DEFAULT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::simulator::{
    empirical_average_entropy, empirical_conditional_law, estimate_occupancy_half_width, run,
    t_quantile_975, SimConfig, SimulationStats,
};

/// Largest absolute error tolerated for `p(x = 0 | delta, xhat)`.
pub const CONDITIONAL_LAW_TOLERANCE: f64 = 0.01;
/// ... for `p(delta, xhat)`.
pub const JOINT_LAW_TOLERANCE: f64 = 0.002;
/// ... for `p(xhat = 0)`.
pub const ESTIMATE_TOLERANCE: f64 = 0.01;
/// ... for the average conditional entropy, in bits.
pub const ENTROPY_TOLERANCE: f64 = 0.01;
/// Ages compared by default.
pub const DEFAULT_MAX_DELTA: u64 = 200;

/// Outcome for one compared quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub quantity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xhat: Option<usize>,
    /// Number of compared cells (1 for scalar quantities).
    pub cells: usize,
    pub max_abs_diff: f64,
    /// Age at which `max_abs_diff` occurs, for per-age quantities.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_delta: Option<u64>,
    pub tolerance: f64,
    /// Cells whose error exceeds both the tolerance and three standard errors.
    pub violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub config: SimConfig,
    pub max_delta: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn check(&self, quantity: &str, xhat: Option<usize>) -> Option<&Check> {
        self.checks
            .iter()
            .find(|c| c.quantity == quantity && c.xhat == xhat)
    }
}

#[derive(Default)]
struct Accumulator {
    cells: usize,
    max: f64,
    worst: Option<u64>,
    violations: usize,
}

impl Accumulator {
    fn add(&mut self, delta: u64, diff: f64, allowed: f64) {
        self.cells += 1;
        if diff > self.max || self.worst.is_none() {
            self.max = self.max.max(diff);
            self.worst = Some(delta);
        }
        if diff > allowed {
            self.violations += 1;
        }
    }

    fn finish(self, quantity: &str, xhat: usize, tolerance: f64) -> Check {
        Check {
            quantity: quantity.into(),
            xhat: Some(xhat),
            cells: self.cells,
            max_abs_diff: self.max,
            worst_delta: self.worst,
            tolerance,
            violations: self.violations,
            analytic: None,
            empirical: None,
            half_width: None,
            passed: self.violations == 0,
        }
    }
}

fn scalar(
    quantity: &str,
    analytic: f64,
    empirical: f64,
    half_width: f64,
    allowed: f64,
    tolerance: f64,
) -> Check {
    let diff = (analytic - empirical).abs();
    let ok = diff <= allowed;
    Check {
        quantity: quantity.into(),
        xhat: None,
        cells: 1,
        max_abs_diff: diff,
        worst_delta: None,
        tolerance,
        violations: usize::from(!ok),
        analytic: Some(analytic),
        empirical: Some(empirical),
        half_width: Some(half_width),
        passed: ok,
    }
}

/// Simulate `config` and compare against the analysis for ages up to
/// `max_delta`. A cell fails when its error exceeds both the quantity's
/// tolerance and three standard errors.
pub fn validate(config: &SimConfig, max_delta: u64) -> Result<ValidationReport> {
    config.validate()?;
    let stats = run(config)?;
    compare(config, &stats, max_delta)
}

/// Compare existing simulation statistics against the analysis.
pub fn compare(
    config: &SimConfig,
    stats: &SimulationStats,
    max_delta: u64,
) -> Result<ValidationReport> {
    let network = &config.network;
    let chain = TerminatingChain::build(network)?;
    let opts = JointLawOptions {
        tolerance: DEFAULT_TOLERANCE,
        min_horizon: max_delta.saturating_add(1),
    };
    let joint = joint_law(network, opts)?;
    let total = stats.total();
    if total == 0 {
        return Err(Error::InsufficientSamples("no counted slots".into()));
    }
    let last = max_delta.min(stats.delta_cap - 1);
    let mut checks = Vec::new();

    for xhat in 0..2 {
        let mut acc = Accumulator::default();
        for delta in 0..=last {
            let Ok(emp) = empirical_conditional_law(stats, delta, xhat) else {
                continue;
            };
            match conditional_source_law(&chain, delta, xhat) {
                Ok(law) => {
                    let allowed = CONDITIONAL_LAW_TOLERANCE.max(3.0 * emp.std_error);
                    acc.add(delta, (law.p0 - emp.law.p0).abs(), allowed);
                }
                // observed a cell the analysis deems impossible
                Err(Error::UnreachableCondition { .. }) => acc.add(delta, 1.0, 0.0),
                Err(e) => return Err(e),
            }
        }
        checks.push(acc.finish("conditional_law", xhat, CONDITIONAL_LAW_TOLERANCE));
    }

    for xhat in 0..2 {
        let mut acc = Accumulator::default();
        for delta in 0..=last {
            let analytic = joint.mass(delta, xhat).unwrap_or(0.0);
            let p = stats.joint_mass(delta, xhat);
            let se = (p * (1.0 - p) / total as f64).sqrt();
            acc.add(
                delta,
                (analytic - p).abs(),
                JOINT_LAW_TOLERANCE.max(3.0 * se),
            );
        }
        checks.push(acc.finish("joint_law", xhat, JOINT_LAW_TOLERANCE));
    }

    let batches = stats.batches.iter().filter(|b| b.counted > 0).count();
    let hw = estimate_occupancy_half_width(stats);
    let se = hw / t_quantile_975(batches.saturating_sub(1));
    checks.push(scalar(
        "estimate_law",
        joint.estimate.p[0],
        stats.estimate_occupancy(0),
        hw,
        ESTIMATE_TOLERANCE.max(3.0 * se),
        ESTIMATE_TOLERANCE,
    ));

    let analytic = average_conditional_entropy(network, DEFAULT_TOLERANCE)?;
    let empirical = empirical_average_entropy(stats)?;
    checks.push(scalar(
        "average_entropy",
        analytic.bits,
        empirical.bits,
        empirical.half_width,
        ENTROPY_TOLERANCE.max(3.0 * empirical.half_width),
        ENTROPY_TOLERANCE,
    ));

    Ok(ValidationReport {
        config: *config,
        max_delta,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}
