//! Parameter sweeps over network size and source asymmetry.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{optimize, OptimizationProblem, DEFAULT_GRID_RESOLUTION, DEFAULT_REFINE_BUDGET};
use crate::analysis::{average_conditional_entropy, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::policy::{AccessPolicy, NetworkConfig};
use crate::source::SourceParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Transmit with probability `1/m` in every slot.
    Random,
    /// Transmit on state changes only.
    Reactive,
    /// Reactive plus persistence traffic up to one packet per slot.
    LoadOne,
    /// Optimized policy.
    Balanced,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Random,
        Strategy::Reactive,
        Strategy::LoadOne,
        Strategy::Balanced,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Reactive => "reactive",
            Strategy::LoadOne => "load-one",
            Strategy::Balanced => "balanced",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown strategy `{s}` (expected random, reactive, load-one or balanced)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub tolerance: f64,
    pub grid_resolution: usize,
    pub refine_budget: usize,
    pub seed: u64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            refine_budget: DEFAULT_REFINE_BUDGET,
            seed: 0,
        }
    }
}

/// Quantities derived for one (configuration, strategy) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub policy: AccessPolicy,
    pub entropy: f64,
    pub error_bound: f64,
    pub tail_mass: f64,
    pub mean_access: f64,
    pub success_probability: f64,
    pub load: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub m: usize,
    /// Asymmetry `alpha / beta` requested for the row.
    pub eta: f64,
    /// `None` when the source itself could not be built.
    pub source: Option<SourceParams>,
    pub strategy: Strategy,
    pub outcome: Result<SweepCell>,
}

pub(crate) fn policy_for(
    strategy: Strategy,
    m: usize,
    source: SourceParams,
    settings: &SweepSettings,
) -> Result<AccessPolicy> {
    match strategy {
        Strategy::Random => AccessPolicy::random(m),
        Strategy::Reactive => Ok(AccessPolicy::reactive()),
        Strategy::LoadOne => AccessPolicy::load_one(&source, m),
        Strategy::Balanced => {
            let problem = OptimizationProblem {
                grid_resolution: settings.grid_resolution,
                refine_budget: settings.refine_budget,
                seed: settings.seed,
                ..OptimizationProblem::new(m, source)
            };
            Ok(optimize(&problem)?.policy)
        }
    }
}

fn evaluate(
    strategy: Strategy,
    m: usize,
    source: SourceParams,
    settings: &SweepSettings,
) -> Result<SweepCell> {
    let policy = policy_for(strategy, m, source, settings)?;
    let config = NetworkConfig::new(m, source, policy)?;
    let h = average_conditional_entropy(&config, settings.tolerance)?;
    Ok(SweepCell {
        policy,
        entropy: h.bits,
        error_bound: h.error_bound,
        tail_mass: h.tail_mass,
        mean_access: config.mean_access_probability(),
        success_probability: config.success_probability(),
        load: config.channel_load(),
    })
}

/// Evaluate every strategy at every network size. Rows come out ordered by
/// `m_values`, then by `strategies`.
pub fn sweep_nodes(
    source: SourceParams,
    m_values: &[usize],
    strategies: &[Strategy],
    settings: &SweepSettings,
) -> Vec<SweepRow> {
    let cells: Vec<(usize, Strategy)> = m_values
        .iter()
        .flat_map(|&m| strategies.iter().map(move |&s| (m, s)))
        .collect();
    cells
        .par_iter()
        .map(|&(m, strategy)| SweepRow {
            m,
            eta: source.asymmetry_factor(),
            source: Some(source),
            strategy,
            outcome: evaluate(strategy, m, source, settings),
        })
        .collect()
}

/// Evaluate every strategy for sources of asymmetry `eta` whose network-wide
/// transition rate equals `budget`. Rows come out ordered by `etas`, then by
/// `strategies`.
pub fn sweep_asymmetry(
    m: usize,
    budget: f64,
    etas: &[f64],
    strategies: &[Strategy],
    settings: &SweepSettings,
) -> Vec<SweepRow> {
    let cells: Vec<(f64, Strategy)> = etas
        .iter()
        .flat_map(|&eta| strategies.iter().map(move |&s| (eta, s)))
        .collect();
    cells
        .par_iter()
        .map(|&(eta, strategy)| {
            let source = SourceParams::from_budget(eta, m, budget);
            SweepRow {
                m,
                eta,
                source: source.as_ref().ok().copied(),
                strategy,
                outcome: source.and_then(|s| evaluate(strategy, m, s, settings)),
            }
        })
        .collect()
}
