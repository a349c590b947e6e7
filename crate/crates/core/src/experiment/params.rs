//! Flat parameter set shared by command-line flags and TOML config files.
//!
//! Every flag `--some-key value` corresponds to a config entry
//! `some-key = value`. Flags override the config file. Each mode accepts a
//! fixed subset of keys; anything else is rejected before any computation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::optimizer::Strategy;
use crate::policy::AccessPolicy;

/// Non-negative integer that also accepts scientific notation (`1e7`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Count(pub u64);

const MAX_EXACT: f64 = 9_007_199_254_740_992.0;

impl Count {
    fn from_f64(v: f64) -> std::result::Result<Self, String> {
        if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v <= MAX_EXACT {
            Ok(Count(v as u64))
        } else {
            Err(format!("`{v}` is not a non-negative integer"))
        }
    }
}

impl FromStr for Count {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if let Ok(v) = s.parse::<u64>() {
            return Ok(Count(v));
        }
        match s.parse::<f64>() {
            Ok(v) => Count::from_f64(v),
            Err(_) => Err(format!("`{s}` is not a count")),
        }
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        // TOML integers are signed 64-bit
        match i64::try_from(self.0) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Float(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Count(v)),
            Raw::Float(v) => Count::from_f64(v),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Comma-separated list on the command line, array in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr<Err = E>, E: fmt::Display> FromStr for List<T> {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|item| item.trim().parse::<T>().map_err(|e| e.to_string()))
            .collect::<std::result::Result<Vec<T>, String>>()
            .and_then(|v| {
                if v.is_empty() {
                    Err("empty list".into())
                } else {
                    Ok(List(v))
                }
            })
    }
}

/// Either a strategy name or an explicit `[l00, l01, l10, l11]` vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicySpec {
    Named(Strategy),
    Vector([f64; 4]),
}

impl FromStr for PolicySpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Ok(st) = s.parse::<Strategy>() {
            return Ok(PolicySpec::Named(st));
        }
        let v: Vec<f64> = s
            .trim_matches(|c| c == '[' || c == ']')
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| {
                format!("`{s}` is neither a strategy name nor four comma-separated probabilities")
            })?;
        let l: [f64; 4] = v
            .try_into()
            .map_err(|_| format!("`{s}` must list exactly four probabilities"))?;
        AccessPolicy::from_array(l).map_err(|e| e.to_string())?;
        Ok(PolicySpec::Vector(l))
    }
}

impl Serialize for PolicySpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PolicySpec::Named(st) => s.serialize_str(st.name()),
            PolicySpec::Vector(l) => l.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for PolicySpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Vector([f64; 4]),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Vector(l) => {
                AccessPolicy::from_array(l).map_err(serde::de::Error::custom)?;
                Ok(PolicySpec::Vector(l))
            }
        }
    }
}

/// Every key any mode understands. Unset keys are `None`.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Params {
    /// Number of nodes.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<Count>,
    /// Probability of the 0 -> 1 source transition.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Probability of the 1 -> 0 source transition.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Asymmetry alpha/beta (with --budget, replaces alpha and beta).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Network-wide source transitions per slot.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    /// Strategy name or `l00,l01,l10,l11`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicySpec>,
    /// Comma-separated strategies for sweeps.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategies: Option<List<Strategy>>,
    /// Comma-separated node counts.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_values: Option<List<Count>>,
    /// Comma-separated asymmetry factors.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub etas: Option<List<f64>>,
    /// Tail-mass tolerance of the analytical laws.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Entropy thresholds (bits) at which to evaluate the CDF.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<List<f64>>,
    /// Number of evenly spaced CDF thresholds in [0, 1].
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<Count>,
    /// Largest age reported in per-age tables.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_delta: Option<Count>,
    /// Simulated slots, warmup included.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slots: Option<Count>,
    /// Slots discarded before counting.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warmup: Option<Count>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<Count>,
    /// Ages at or above the cap share one histogram bin.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_cap: Option<Count>,
    /// Batches for confidence half-widths.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batches: Option<Count>,
    /// Aggregate statistics over all nodes (true) or node 0 only (false).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub track_all_nodes: Option<bool>,
    /// Node whose trajectory is recorded.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<Count>,
    /// Target channel load in packets per slot.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub load: Option<f64>,
    /// Grid points per axis in the policy search.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_resolution: Option<Count>,
    /// Objective evaluations spent on local refinement.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine_budget: Option<Count>,
    /// Output file (standard output when absent).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Output file for the entropy CDF.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cdf_output: Option<PathBuf>,
    /// Output file for the simulation summary (JSON).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary_output: Option<PathBuf>,
    /// Directory receiving figure files.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl Params {
    fn to_map(&self) -> BTreeMap<String, toml::Value> {
        let value = toml::Value::try_from(self).expect("parameters serialize to TOML");
        match value {
            toml::Value::Table(t) => t.into_iter().collect(),
            _ => unreachable!("parameters serialize to a table"),
        }
    }

    /// Keys that carry a value.
    pub fn keys(&self) -> Vec<String> {
        self.to_map().into_keys().collect()
    }

    /// Overlay `self` (typically flags) on top of `base` (a config file).
    pub fn merged_over(&self, base: &Params) -> Params {
        let mut map = base.to_map();
        map.extend(self.to_map());
        let table: toml::Table = map.into_iter().collect();
        table.try_into().expect("merging valid parameter sets")
    }

    pub fn from_toml(text: &str) -> Result<Params> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    /// Load a TOML config, or the provenance block heading a CSV written by
    /// an earlier run.
    pub fn from_file(path: &Path) -> Result<Params> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let parsed = if text.starts_with(super::output::PROVENANCE_PREFIX) {
            super::output::read_provenance(&text)
        } else {
            Self::from_toml(&text)
        };
        parsed.map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("parameters serialize to TOML")
    }

    /// Reject keys outside `allowed`.
    pub fn check_keys(&self, mode: &str, allowed: &[&str]) -> Result<()> {
        let extra: Vec<String> = self
            .keys()
            .into_iter()
            .filter(|k| !allowed.contains(&k.as_str()))
            .collect();
        if extra.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "{mode} does not accept: {} (allowed: {})",
                extra.join(", "),
                allowed.join(", ")
            )))
        }
    }

    pub fn require<T: Clone>(value: &Option<T>, key: &str, mode: &str) -> Result<T> {
        value
            .clone()
            .ok_or_else(|| Error::Config(format!("{mode} requires --{key}")))
    }
}

pub(crate) fn count_usize(c: Count, key: &'static str) -> Result<usize> {
    usize::try_from(c.0).map_err(|_| Error::InvalidParameter {
        name: key,
        reason: format!("{} is too large", c.0),
    })
}
