//! One runner per mode: resolve parameters, compute, write the output.

use std::path::Path;

use serde::Serialize;

use super::output::{emit, format_float, format_opt, Table};
use super::params::{count_usize, Count, List, Params, PolicySpec};
use super::recipes::{emit_figure_data, Figure, FigureRecipe};
use super::validate::{validate, DEFAULT_MAX_DELTA};
use crate::analysis::{joint_law, JointLawOptions, TerminatingChain, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::optimizer::{
    optimize, policy_for, sweep_asymmetry, sweep_nodes, OptimizationProblem, Strategy, SweepRow,
    SweepSettings, DEFAULT_GRID_RESOLUTION, DEFAULT_REFINE_BUDGET,
};
use crate::policy::{AccessPolicy, NetworkConfig};
use crate::simulator::{
    empirical_average_entropy, estimate_occupancy_half_width, run, sample_timeline, SimConfig,
    SlotOutcome, DEFAULT_BATCHES, DEFAULT_WARMUP,
};
use crate::source::SourceParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analyze,
    Simulate,
    Optimize,
    SweepNodes,
    SweepAsymmetry,
    Validate,
    Timeline,
    Figure(Figure),
}

const SOURCE: [&str; 5] = ["m", "alpha", "beta", "eta", "budget"];
const SEARCH: [&str; 3] = ["grid-resolution", "refine-budget", "seed"];
const SIM: [&str; 6] = [
    "slots",
    "warmup",
    "seed",
    "delta-cap",
    "batches",
    "track-all-nodes",
];

impl Mode {
    pub fn name(self) -> String {
        match self {
            Mode::Analyze => "analyze".into(),
            Mode::Simulate => "simulate".into(),
            Mode::Optimize => "optimize".into(),
            Mode::SweepNodes => "sweep-nodes".into(),
            Mode::SweepAsymmetry => "sweep-asymmetry".into(),
            Mode::Validate => "validate".into(),
            Mode::Timeline => "timeline".into(),
            Mode::Figure(f) => format!("figure {}", f.name()),
        }
    }

    pub fn allowed_keys(self) -> Vec<&'static str> {
        let mut keys: Vec<&'static str> = match self {
            Mode::Analyze => [
                &SOURCE[..],
                &SEARCH,
                &["policy", "tolerance", "thresholds", "output", "cdf-output"],
            ]
            .concat(),
            Mode::Simulate => [
                &SOURCE[..],
                &SEARCH,
                &SIM,
                &["policy", "output", "summary-output"],
            ]
            .concat(),
            Mode::Optimize => [&SOURCE[..], &SEARCH, &["load", "output"]].concat(),
            Mode::SweepNodes => [
                &[
                    "alpha",
                    "beta",
                    "m-values",
                    "strategies",
                    "tolerance",
                    "output",
                ][..],
                &SEARCH,
            ]
            .concat(),
            Mode::SweepAsymmetry => [
                &["m", "budget", "etas", "strategies", "tolerance", "output"][..],
                &SEARCH,
            ]
            .concat(),
            Mode::Validate => [
                &SOURCE[..],
                &SEARCH,
                &SIM,
                &["policy", "max-delta", "output"],
            ]
            .concat(),
            Mode::Timeline => [
                &SOURCE[..],
                &SEARCH,
                &["policy", "slots", "warmup", "node", "output"],
            ]
            .concat(),
            Mode::Figure(f) => f.override_keys().to_vec(),
        };
        keys.sort_unstable();
        keys.dedup();
        keys
    }
}

/// Run `mode` with already merged parameters.
pub fn execute(mode: Mode, params: &Params) -> Result<()> {
    let name = mode.name();
    params.check_keys(&name, &mode.allowed_keys())?;
    let mut ctx = Resolver::new(name, params);
    match mode {
        Mode::Analyze => analyze(&mut ctx),
        Mode::Simulate => simulate(&mut ctx),
        Mode::Optimize => optimize_mode(&mut ctx),
        Mode::SweepNodes => sweep_nodes_mode(&mut ctx),
        Mode::SweepAsymmetry => sweep_asymmetry_mode(&mut ctx),
        Mode::Validate => validate_mode(&mut ctx),
        Mode::Timeline => timeline(&mut ctx),
        Mode::Figure(figure) => {
            let dir = params.out_dir.clone().unwrap_or_else(|| ".".into());
            let recipe = FigureRecipe {
                figure,
                overrides: strip_destinations(params),
            };
            emit_figure_data(&recipe, &dir).map(|_| ())
        }
    }
}

/// Drop keys that only choose destinations and never affect file contents.
pub(crate) fn strip_destinations(p: &Params) -> Params {
    Params {
        output: None,
        cdf_output: None,
        summary_output: None,
        out_dir: None,
        ..p.clone()
    }
}

/// Tracks the fully resolved parameter set, defaults included, for the
/// provenance block.
pub(crate) struct Resolver {
    pub mode: String,
    pub given: Params,
    pub resolved: Params,
}

impl Resolver {
    pub fn new(mode: impl Into<String>, params: &Params) -> Self {
        Self {
            mode: mode.into(),
            given: params.clone(),
            resolved: strip_destinations(params),
        }
    }

    fn missing(&self, key: &str) -> Error {
        Error::Config(format!("{} requires --{key}", self.mode))
    }

    pub fn m(&mut self) -> Result<usize> {
        let m = self.given.m.ok_or_else(|| self.missing("m"))?;
        count_usize(m, "m")
    }

    pub fn source(&mut self, m: usize) -> Result<SourceParams> {
        let p = &self.given;
        match (p.alpha, p.beta, p.eta, p.budget) {
            (Some(a), Some(b), None, None) => SourceParams::new(a, b),
            (None, None, Some(eta), Some(budget)) => SourceParams::from_budget(eta, m, budget),
            (None, None, _, _) => Err(Error::Config(format!(
                "{} requires either --alpha and --beta or --eta and --budget",
                self.mode
            ))),
            _ => Err(Error::Config(
                "give either --alpha and --beta, or --eta and --budget, not a mix".into(),
            )),
        }
    }

    pub fn count(&mut self, key: &'static str, default: Option<u64>) -> Result<u64> {
        let field = count_field(&mut self.resolved, key);
        match (*field, default) {
            (Some(c), _) => Ok(c.0),
            (None, Some(d)) => {
                *field = Some(Count(d));
                Ok(d)
            }
            (None, None) => Err(Error::Config(format!("{} requires --{key}", self.mode))),
        }
    }

    pub fn seed(&mut self) -> u64 {
        self.count("seed", Some(0)).expect("seed has a default")
    }

    pub fn tolerance(&mut self) -> Result<f64> {
        let tol = *self.resolved.tolerance.get_or_insert(DEFAULT_TOLERANCE);
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidParameter {
                name: "tolerance",
                reason: format!("must lie in (0, 1), got {tol}"),
            });
        }
        Ok(tol)
    }

    pub fn settings(&mut self) -> Result<SweepSettings> {
        Ok(SweepSettings {
            tolerance: DEFAULT_TOLERANCE,
            grid_resolution: count_usize(
                Count(self.count("grid-resolution", Some(DEFAULT_GRID_RESOLUTION as u64))?),
                "grid_resolution",
            )?,
            refine_budget: count_usize(
                Count(self.count("refine-budget", Some(DEFAULT_REFINE_BUDGET as u64))?),
                "refine_budget",
            )?,
            seed: self.seed(),
        })
    }

    pub fn strategies(&mut self) -> Vec<Strategy> {
        self.resolved
            .strategies
            .get_or_insert_with(|| List(Strategy::ALL.to_vec()))
            .0
            .clone()
    }

    pub fn policy(&mut self, m: usize, source: SourceParams) -> Result<AccessPolicy> {
        let spec = self.given.policy.ok_or_else(|| self.missing("policy"))?;
        match spec {
            PolicySpec::Vector(l) => AccessPolicy::from_array(l),
            PolicySpec::Named(Strategy::Balanced) => {
                let settings = self.settings()?;
                policy_for(Strategy::Balanced, m, source, &settings)
            }
            PolicySpec::Named(s) => policy_for(s, m, source, &SweepSettings::default()),
        }
    }

    pub fn sim_config(&mut self, network: NetworkConfig) -> Result<SimConfig> {
        let slots = self.count("slots", None)?;
        let mut cfg = SimConfig::new(network, slots, self.seed());
        cfg.warmup = self.count("warmup", Some(DEFAULT_WARMUP.min(slots / 10)))?;
        cfg.delta_cap = self.count("delta-cap", Some(cfg.delta_cap))?;
        cfg.batches = count_usize(
            Count(self.count("batches", Some(DEFAULT_BATCHES as u64))?),
            "batches",
        )?;
        cfg.track_all_nodes = *self.resolved.track_all_nodes.get_or_insert(true);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn write(&self, table: &Table, path: Option<&Path>) -> Result<()> {
        table.write(path, &self.mode, &self.resolved)
    }
}

fn count_field<'a>(p: &'a mut Params, key: &str) -> &'a mut Option<Count> {
    match key {
        "m" => &mut p.m,
        "points" => &mut p.points,
        "max-delta" => &mut p.max_delta,
        "slots" => &mut p.slots,
        "warmup" => &mut p.warmup,
        "seed" => &mut p.seed,
        "delta-cap" => &mut p.delta_cap,
        "batches" => &mut p.batches,
        "node" => &mut p.node,
        "grid-resolution" => &mut p.grid_resolution,
        "refine-budget" => &mut p.refine_budget,
        other => unreachable!("`{other}` is not a count key"),
    }
}

pub(crate) fn policy_cells(p: Option<AccessPolicy>) -> Vec<String> {
    match p {
        Some(p) => p.as_array().iter().map(|&v| format_float(v)).collect(),
        None => vec![String::new(); 4],
    }
}

fn network(ctx: &mut Resolver) -> Result<NetworkConfig> {
    let m = ctx.m()?;
    let source = ctx.source(m)?;
    let policy = ctx.policy(m, source)?;
    NetworkConfig::new(m, source, policy)
}

fn analyze(ctx: &mut Resolver) -> Result<()> {
    let net = network(ctx)?;
    let tol = ctx.tolerance()?;
    let chain = TerminatingChain::build(&net)?;
    let joint = joint_law(&net, JointLawOptions::with_tolerance(tol))?;
    let h = joint.average_entropy();
    let src = net.source;
    let mut t = Table::new([
        "m",
        "alpha",
        "beta",
        "eta",
        "l00",
        "l01",
        "l10",
        "l11",
        "entropy_bits",
        "error_bound",
        "tail_mass",
        "source_entropy_bits",
        "mean_access",
        "success_probability",
        "load",
        "p_xhat0",
        "mean_w0",
        "mean_w1",
    ]);
    let w = chain.mean_absorption_times()?;
    let mut row = vec![
        net.m().to_string(),
        format_float(src.alpha()),
        format_float(src.beta()),
        format_float(src.asymmetry_factor()),
    ];
    row.extend(policy_cells(Some(net.policy)));
    row.extend(
        [
            h.bits,
            h.error_bound,
            h.tail_mass,
            src.entropy(),
            net.mean_access_probability(),
            net.success_probability(),
            net.channel_load(),
            joint.estimate.p[0],
            w[0],
            w[1],
        ]
        .map(format_float),
    );
    t.push(row);

    let cdf = match &ctx.given.thresholds {
        Some(List(z)) => {
            let path = ctx
                .given
                .cdf_output
                .clone()
                .ok_or_else(|| ctx.missing("cdf-output"))?;
            let mut c = Table::new(["zeta", "probability", "band"]);
            for pt in joint.entropy_cdf(z)? {
                c.push(vec![
                    format_float(pt.zeta),
                    format_float(pt.probability),
                    format_float(pt.band),
                ]);
            }
            Some((c, path))
        }
        None if ctx.given.cdf_output.is_some() => {
            return Err(Error::Config("--cdf-output needs --thresholds".into()));
        }
        None => None,
    };
    ctx.write(&t, ctx.given.output.as_deref())?;
    if let Some((c, path)) = cdf {
        ctx.write(&c, Some(&path))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulationSummary {
    counted_slots: u64,
    tracked_nodes: usize,
    singletons: u64,
    collisions: u64,
    idles: u64,
    receptions_node0: u64,
    entropy_bits: f64,
    entropy_half_width: f64,
    p_xhat0: f64,
    p_xhat0_half_width: f64,
    mismatch_fraction: f64,
}

fn simulate(ctx: &mut Resolver) -> Result<()> {
    let net = network(ctx)?;
    let cfg = ctx.sim_config(net)?;
    let stats = run(&cfg)?;
    let total = stats.total() as f64;
    let mut t = Table::new([
        "delta",
        "xhat",
        "overflow",
        "n_x0",
        "n_x1",
        "p_x0",
        "std_error",
        "joint_mass",
    ]);
    let rows = stats
        .counts
        .iter()
        .enumerate()
        .map(|(d, c)| (d as u64, false, c))
        .chain(std::iter::once((stats.delta_cap, true, &stats.overflow)));
    for (delta, overflow, cell) in rows {
        for (xhat, n) in cell.iter().enumerate() {
            let k = n[0] + n[1];
            if k == 0 {
                continue;
            }
            let p = n[0] as f64 / k as f64;
            t.push(vec![
                delta.to_string(),
                xhat.to_string(),
                u8::from(overflow).to_string(),
                n[0].to_string(),
                n[1].to_string(),
                format_float(p),
                format_float((p * (1.0 - p) / k as f64).sqrt()),
                format_float(k as f64 / total),
            ]);
        }
    }
    ctx.write(&t, ctx.given.output.as_deref())?;

    if let Some(path) = &ctx.given.summary_output {
        let h = empirical_average_entropy(&stats)?;
        let summary = SimulationSummary {
            counted_slots: stats.counted_slots,
            tracked_nodes: stats.tracked_nodes,
            singletons: stats.singletons,
            collisions: stats.collisions,
            idles: stats.idles,
            receptions_node0: stats.receptions,
            entropy_bits: h.bits,
            entropy_half_width: h.half_width,
            p_xhat0: stats.estimate_occupancy(0),
            p_xhat0_half_width: estimate_occupancy_half_width(&stats),
            mismatch_fraction: stats.mismatch_fraction(),
        };
        write_json(&ctx.mode, &ctx.resolved, &summary, Some(path))?;
    }
    Ok(())
}

/// JSON document with the same provenance information as the CSV files.
pub(crate) fn write_json<T: Serialize>(
    mode: &str,
    resolved: &Params,
    body: &T,
    path: Option<&Path>,
) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        tool: &'static str,
        version: &'static str,
        mode: &'a str,
        config: &'a Params,
        result: &'a T,
    }
    let doc = Doc {
        tool: "aloha-entropy",
        version: env!("CARGO_PKG_VERSION"),
        mode,
        config: resolved,
        result: body,
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
    bytes.push(b'\n');
    emit(path, &bytes)
}

fn optimize_mode(ctx: &mut Resolver) -> Result<()> {
    let m = ctx.m()?;
    let source = ctx.source(m)?;
    let settings = ctx.settings()?;
    let mut problem = OptimizationProblem {
        grid_resolution: settings.grid_resolution,
        refine_budget: settings.refine_budget,
        seed: settings.seed,
        ..OptimizationProblem::new(m, source)
    };
    if let Some(load) = ctx.given.load {
        problem = problem.with_load(load);
    }
    let res = optimize(&problem)?;
    let net = NetworkConfig::new(m, source, res.policy)?;
    let mut t = Table::new([
        "m",
        "alpha",
        "beta",
        "load_target",
        "l00",
        "l01",
        "l10",
        "l11",
        "entropy_bits",
        "evaluations",
        "improvements",
        "mean_access",
        "success_probability",
        "load",
    ]);
    let mut row = vec![
        m.to_string(),
        format_float(source.alpha()),
        format_float(source.beta()),
        format_opt(ctx.given.load),
    ];
    row.extend(policy_cells(Some(res.policy)));
    row.extend([
        format_float(res.objective),
        res.evaluations.to_string(),
        res.trace.len().to_string(),
        format_float(net.mean_access_probability()),
        format_float(net.success_probability()),
        format_float(net.channel_load()),
    ]);
    t.push(row);
    ctx.write(&t, ctx.given.output.as_deref())
}

pub(crate) fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new([
        "m",
        "eta",
        "alpha",
        "beta",
        "strategy",
        "l00",
        "l01",
        "l10",
        "l11",
        "entropy_bits",
        "error_bound",
        "tail_mass",
        "mean_access",
        "success_probability",
        "load",
        "error_kind",
        "error_message",
    ]);
    for r in rows {
        let mut row = vec![
            r.m.to_string(),
            format_float(r.eta),
            format_opt(r.source.map(|s| s.alpha())),
            format_opt(r.source.map(|s| s.beta())),
            r.strategy.name().into(),
        ];
        match &r.outcome {
            Ok(c) => {
                row.extend(policy_cells(Some(c.policy)));
                row.extend(
                    [
                        c.entropy,
                        c.error_bound,
                        c.tail_mass,
                        c.mean_access,
                        c.success_probability,
                        c.load,
                    ]
                    .map(format_float),
                );
                row.extend([String::new(), String::new()]);
            }
            Err(e) => {
                row.extend(vec![String::new(); 10]);
                row.extend([e.kind().to_string(), e.to_string()]);
            }
        }
        t.push(row);
    }
    t
}

fn sweep_nodes_mode(ctx: &mut Resolver) -> Result<()> {
    let source = match (ctx.given.alpha, ctx.given.beta) {
        (Some(a), Some(b)) => SourceParams::new(a, b)?,
        _ => {
            return Err(Error::Config(
                "sweep-nodes requires --alpha and --beta".into(),
            ))
        }
    };
    let m_values: Vec<usize> = ctx
        .given
        .m_values
        .clone()
        .ok_or_else(|| ctx.missing("m-values"))?
        .0
        .into_iter()
        .map(|c| count_usize(c, "m"))
        .collect::<Result<_>>()?;
    let strategies = ctx.strategies();
    let settings = SweepSettings {
        tolerance: ctx.tolerance()?,
        ..ctx.settings()?
    };
    let rows = sweep_nodes(source, &m_values, &strategies, &settings);
    ctx.write(&sweep_table(&rows), ctx.given.output.as_deref())
}

fn sweep_asymmetry_mode(ctx: &mut Resolver) -> Result<()> {
    let m = ctx.m()?;
    let budget = ctx.given.budget.ok_or_else(|| ctx.missing("budget"))?;
    let etas = ctx.given.etas.clone().ok_or_else(|| ctx.missing("etas"))?.0;
    let strategies = ctx.strategies();
    let settings = SweepSettings {
        tolerance: ctx.tolerance()?,
        ..ctx.settings()?
    };
    let rows = sweep_asymmetry(m, budget, &etas, &strategies, &settings);
    ctx.write(&sweep_table(&rows), ctx.given.output.as_deref())
}

fn validate_mode(ctx: &mut Resolver) -> Result<()> {
    let net = network(ctx)?;
    let cfg = ctx.sim_config(net)?;
    let max_delta = ctx.count("max-delta", Some(DEFAULT_MAX_DELTA))?;
    let report = validate(&cfg, max_delta)?;
    write_json(
        &ctx.mode,
        &ctx.resolved,
        &report,
        ctx.given.output.as_deref(),
    )
}

pub(crate) fn outcome_label(outcome: SlotOutcome, node: usize) -> &'static str {
    match outcome {
        SlotOutcome::Idle => "idle",
        SlotOutcome::Collision => "collision",
        SlotOutcome::Delivered(i) if i == node => "delivered",
        SlotOutcome::Delivered(_) => "other",
    }
}

pub(crate) fn timeline_table(cfg: &SimConfig, node: usize, slots: u64) -> Result<Table> {
    let rows = sample_timeline(cfg, node, slots)?;
    let mut t = Table::new(["slot", "state", "delta", "xhat", "entropy_bits", "outcome"]);
    for r in rows {
        t.push(vec![
            r.slot.to_string(),
            r.state.to_string(),
            r.delta.map(|d| d.to_string()).unwrap_or_default(),
            r.xhat.map(|x| x.to_string()).unwrap_or_default(),
            format_opt(r.entropy),
            outcome_label(r.outcome, node).into(),
        ]);
    }
    Ok(t)
}

fn timeline(ctx: &mut Resolver) -> Result<()> {
    let net = network(ctx)?;
    let slots = ctx.count("slots", None)?;
    let warmup = ctx.count("warmup", Some(DEFAULT_WARMUP))?;
    let node = count_usize(Count(ctx.count("node", Some(0))?), "node")?;
    let cfg = SimConfig {
        warmup,
        ..SimConfig::new(net, warmup + slots.max(1), ctx.seed())
    };
    let t = timeline_table(&cfg, node, slots)?;
    ctx.write(&t, ctx.given.output.as_deref())
}
