//! Figure recipes: fixed physical parameters plus a few desk-scale overrides.
//!
//! | figure | content | fixed parameters | overridable |
//! |--------|---------|------------------|-------------|
//! | fig2 | entropy timeline of one node | m=50, alpha=0.1, beta=0.01, l=1/m | slots, warmup, seed, node |
//! | fig3 | analysis vs simulation | m=50, alpha=beta=0.02, reactive | slots, warmup, seed, max-delta, track-all-nodes |
//! | fig4 | CDF of h, random vs reactive | alpha=beta=0.02 | m-values, points, tolerance |
//! | fig5 | H vs m, all strategies | alpha=beta=0.02 | m-values, grid-resolution, refine-budget, seed, tolerance |
//! | fig6 | H and balanced policy vs eta | m=50, budget 0.8 | etas, grid-resolution, refine-budget, seed, tolerance |

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::modes::{policy_cells, timeline_table, Resolver};
use super::output::{format_float, format_opt, Table};
use super::params::{count_usize, List, Params};
use crate::analysis::{
    conditional_source_law, joint_law, JointLawOptions, TerminatingChain, DEFAULT_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::optimizer::{sweep_asymmetry, sweep_nodes, Strategy, SweepCell, SweepRow};
use crate::policy::{AccessPolicy, NetworkConfig};
use crate::simulator::{empirical_conditional_law, run, SimConfig, DEFAULT_WARMUP};
use crate::source::SourceParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

pub const FIG5_NODES: [u64; 10] = [5, 10, 20, 30, 40, 50, 75, 100, 150, 200];
pub const FIG6_ETAS: [f64; 8] = [1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0];
pub const FIG4_NODES: [u64; 3] = [10, 50, 100];

impl Figure {
    pub const ALL: [Figure; 5] = [
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        }
    }

    pub fn override_keys(self) -> &'static [&'static str] {
        match self {
            Figure::Fig2 => &["slots", "warmup", "seed", "node", "out-dir"],
            Figure::Fig3 => &[
                "slots",
                "warmup",
                "seed",
                "max-delta",
                "track-all-nodes",
                "out-dir",
            ],
            Figure::Fig4 => &["m-values", "points", "tolerance", "out-dir"],
            Figure::Fig5 => &[
                "m-values",
                "grid-resolution",
                "refine-budget",
                "seed",
                "tolerance",
                "out-dir",
            ],
            Figure::Fig6 => &[
                "etas",
                "grid-resolution",
                "refine-budget",
                "seed",
                "tolerance",
                "out-dir",
            ],
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown figure `{s}` (expected fig2 ... fig6)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureRecipe {
    pub figure: Figure,
    /// Desk-scale overrides; must use the figure's override keys.
    pub overrides: Params,
}

impl FigureRecipe {
    pub fn new(figure: Figure) -> Self {
        Self {
            figure,
            overrides: Params::default(),
        }
    }
}

/// Write the data files of `recipe` into `out_dir` and return their paths.
pub fn emit_figure_data(recipe: &FigureRecipe, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mode = format!("figure {}", recipe.figure.name());
    recipe
        .overrides
        .check_keys(&mode, recipe.figure.override_keys())?;
    let mut ctx = Resolver::new(mode, &recipe.overrides);
    let outputs = match recipe.figure {
        Figure::Fig2 => fig2(&mut ctx)?,
        Figure::Fig3 => fig3(&mut ctx)?,
        Figure::Fig4 => fig4(&mut ctx)?,
        Figure::Fig5 => fig5(&mut ctx)?,
        Figure::Fig6 => fig6(&mut ctx)?,
    };
    let mut paths = Vec::new();
    for (name, table) in outputs {
        let path = out_dir.join(name);
        ctx.write(&table, Some(&path))?;
        paths.push(path);
    }
    Ok(paths)
}

type Outputs = Vec<(&'static str, Table)>;

fn symmetric() -> SourceParams {
    SourceParams::symmetric(0.02).expect("valid source")
}

fn fig2(ctx: &mut Resolver) -> Result<Outputs> {
    let m = 50;
    let net = NetworkConfig::new(m, SourceParams::new(0.1, 0.01)?, AccessPolicy::random(m)?)?;
    let slots = ctx.count("slots", Some(1500))?;
    let warmup = ctx.count("warmup", Some(DEFAULT_WARMUP))?;
    let seed = ctx.count("seed", Some(1))?;
    let node = count_usize(super::params::Count(ctx.count("node", Some(0))?), "node")?;
    let cfg = SimConfig {
        warmup,
        ..SimConfig::new(net, warmup + slots.max(1), seed)
    };
    Ok(vec![(
        "fig2_timeline.csv",
        timeline_table(&cfg, node, slots)?,
    )])
}

fn fig3(ctx: &mut Resolver) -> Result<Outputs> {
    let net = NetworkConfig::new(50, symmetric(), AccessPolicy::reactive())?;
    let slots = ctx.count("slots", Some(10_000_000))?;
    let seed = ctx.count("seed", Some(1))?;
    let mut cfg = SimConfig::new(net, slots, seed);
    cfg.warmup = ctx.count("warmup", Some(cfg.warmup))?;
    cfg.track_all_nodes = *ctx.resolved.track_all_nodes.get_or_insert(true);
    let max_delta = ctx.count("max-delta", Some(200))?;
    cfg.validate()?;

    let stats = run(&cfg)?;
    let chain = TerminatingChain::build(&net)?;
    let joint = joint_law(
        &net,
        JointLawOptions {
            tolerance: DEFAULT_TOLERANCE,
            min_horizon: max_delta + 1,
        },
    )?;

    let mut law = Table::new([
        "delta",
        "analytic_xhat0",
        "empirical_xhat0",
        "std_error_xhat0",
        "samples_xhat0",
        "analytic_xhat1",
        "empirical_xhat1",
        "std_error_xhat1",
        "samples_xhat1",
    ]);
    let mut mass = Table::new([
        "delta",
        "analytic_xhat0",
        "empirical_xhat0",
        "analytic_xhat1",
        "empirical_xhat1",
    ]);
    for delta in 0..=max_delta {
        let mut row = vec![delta.to_string()];
        let mut mrow = vec![delta.to_string()];
        for xhat in 0..2 {
            row.push(format_opt(
                conditional_source_law(&chain, delta, xhat)
                    .ok()
                    .map(|l| l.p0),
            ));
            match empirical_conditional_law(&stats, delta, xhat) {
                Ok(e) => row.extend([
                    format_float(e.law.p0),
                    format_float(e.std_error),
                    e.samples.to_string(),
                ]),
                Err(_) => row.extend([String::new(), String::new(), "0".into()]),
            }
            mrow.push(format_float(joint.mass(delta, xhat).unwrap_or(0.0)));
            mrow.push(if delta < stats.delta_cap {
                format_float(stats.joint_mass(delta, xhat))
            } else {
                String::new()
            });
        }
        law.push(row);
        mass.push(mrow);
    }
    Ok(vec![
        ("fig3_conditional.csv", law),
        ("fig3_joint.csv", mass),
    ])
}

fn node_list(ctx: &mut Resolver, default: &[u64]) -> Result<Vec<usize>> {
    let list = ctx
        .resolved
        .m_values
        .get_or_insert_with(|| List(default.iter().map(|&v| super::params::Count(v)).collect()))
        .0
        .clone();
    list.into_iter().map(|c| count_usize(c, "m")).collect()
}

fn fig4(ctx: &mut Resolver) -> Result<Outputs> {
    let ms = node_list(ctx, &FIG4_NODES)?;
    let points = ctx.count("points", Some(101))?;
    if points < 2 {
        return Err(Error::InvalidParameter {
            name: "points",
            reason: "need at least 2".into(),
        });
    }
    let tol = ctx.tolerance()?;
    let zeta: Vec<f64> = (0..points)
        .map(|i| i as f64 / (points - 1) as f64)
        .collect();
    let mut header = vec!["zeta".to_string()];
    let mut columns = Vec::new();
    for &m in &ms {
        for (label, policy) in [
            ("random", AccessPolicy::random(m)?),
            ("reactive", AccessPolicy::reactive()),
        ] {
            header.push(format!("{label}_m{m}"));
            header.push(format!("band_{label}_m{m}"));
            let net = NetworkConfig::new(m, symmetric(), policy)?;
            let cdf = joint_law(&net, JointLawOptions::with_tolerance(tol))?.entropy_cdf(&zeta)?;
            columns.push(cdf);
        }
    }
    let mut t = Table::new(header);
    for (i, z) in zeta.iter().enumerate() {
        let mut row = vec![format_float(*z)];
        for c in &columns {
            row.push(format_float(c[i].probability));
            row.push(format_float(c[i].band));
        }
        t.push(row);
    }
    Ok(vec![("fig4_cdf.csv", t)])
}

/// Wide table: one row per sweep point, one column group per strategy.
fn wide_table(key: &str, rows: &[SweepRow], strategies: &[Strategy]) -> Table {
    let mut header = vec![
        key.to_string(),
        "alpha".into(),
        "beta".into(),
        "source_entropy_bits".into(),
    ];
    for s in strategies {
        header.push(format!("h_{}", s.name().replace('-', "_")));
    }
    for s in strategies {
        header.push(format!("load_{}", s.name().replace('-', "_")));
    }
    header.extend(
        [
            "balanced_l00",
            "balanced_l01",
            "balanced_l10",
            "balanced_l11",
        ]
        .map(String::from),
    );
    let mut t = Table::new(header);
    for group in rows.chunks(strategies.len()) {
        let first = &group[0];
        let x = if key == "m" {
            first.m.to_string()
        } else {
            format_float(first.eta)
        };
        let cell = |r: &SweepRow| -> Option<SweepCell> { r.outcome.as_ref().ok().copied() };
        let mut row = vec![
            x,
            format_opt(first.source.map(|s| s.alpha())),
            format_opt(first.source.map(|s| s.beta())),
            format_opt(first.source.map(|s| s.entropy())),
        ];
        row.extend(group.iter().map(|r| format_opt(cell(r).map(|c| c.entropy))));
        row.extend(group.iter().map(|r| format_opt(cell(r).map(|c| c.load))));
        let balanced = group
            .iter()
            .find(|r| r.strategy == Strategy::Balanced)
            .and_then(cell);
        row.extend(policy_cells(balanced.map(|c| c.policy)));
        t.push(row);
    }
    t
}

fn fig5(ctx: &mut Resolver) -> Result<Outputs> {
    let ms = node_list(ctx, &FIG5_NODES)?;
    let settings = crate::optimizer::SweepSettings {
        tolerance: ctx.tolerance()?,
        ..ctx.settings()?
    };
    let rows = sweep_nodes(symmetric(), &ms, &Strategy::ALL, &settings);
    Ok(vec![(
        "fig5_nodes.csv",
        wide_table("m", &rows, &Strategy::ALL),
    )])
}

fn fig6(ctx: &mut Resolver) -> Result<Outputs> {
    let etas = ctx
        .resolved
        .etas
        .get_or_insert_with(|| List(FIG6_ETAS.to_vec()))
        .0
        .clone();
    let settings = crate::optimizer::SweepSettings {
        tolerance: ctx.tolerance()?,
        ..ctx.settings()?
    };
    let strategies = [Strategy::Random, Strategy::Reactive, Strategy::Balanced];
    let rows = sweep_asymmetry(50, 0.8, &etas, &strategies, &settings);
    Ok(vec![(
        "fig6_asymmetry.csv",
        wide_table("eta", &rows, &strategies),
    )])
}
