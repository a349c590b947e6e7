//! Exact Monte Carlo simulation of the whole network.
//!
//! Unlike the analysis, which treats the other `m - 1` nodes as independent
//! Bernoulli interferers, the simulator evolves every source and resolves
//! every slot of the collision channel.
//!
//! Each slot proceeds as: (1) every source makes its Markov transition,
//! (2) every node transmits with probability `l[prev][cur]`, (3) if exactly
//! one node transmitted, the sink decodes it, installs its current state as
//! the estimate and resets its AoI to zero; every other node ages by one.
//!
//! Randomness: node `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on
//! stream `i`, so each node's stream is fixed by `(seed, i)` alone.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{ConditionalSourceLaw, TerminatingChain};
use crate::error::{Error, Result};
use crate::policy::NetworkConfig;
use crate::source::binary_entropy;

/// Default number of discarded initial slots.
pub const DEFAULT_WARMUP: u64 = 100_000;

/// Number of batches used for batch-means confidence intervals.
pub const DEFAULT_BATCHES: usize = 20;

const MAX_DELTA_CAP: u64 = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub network: NetworkConfig,
    /// Total simulated slots, warmup included.
    pub slots: u64,
    pub warmup: u64,
    pub seed: u64,
    /// Aggregate statistics over every node instead of node 0 only.
    pub track_all_nodes: bool,
    /// Ages at or above the cap share a single overflow bin.
    pub delta_cap: u64,
    pub batches: usize,
}

impl SimConfig {
    /// Configuration with default warmup, batches and AoI cap.
    pub fn new(network: NetworkConfig, slots: u64, seed: u64) -> Self {
        Self {
            network,
            slots,
            warmup: DEFAULT_WARMUP.min(slots / 10),
            seed,
            track_all_nodes: true,
            delta_cap: default_delta_cap(&network),
            batches: DEFAULT_BATCHES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.slots <= self.warmup {
            return Err(Error::InvalidParameter {
                name: "slots",
                reason: format!("must exceed warmup ({} <= {})", self.slots, self.warmup),
            });
        }
        if self.delta_cap < 1 {
            return Err(Error::InvalidParameter {
                name: "delta_cap",
                reason: "must be at least 1".into(),
            });
        }
        if self.batches < 2 || (self.batches as u64) > self.slots - self.warmup {
            return Err(Error::InvalidParameter {
                name: "batches",
                reason: format!("need 2..=counted slots, got {}", self.batches),
            });
        }
        Ok(())
    }
}

/// `10 max(1/alpha, 1/beta, E[W])`, bounded to keep the histogram in memory.
pub fn default_delta_cap(network: &NetworkConfig) -> u64 {
    let src = network.source;
    let mut scale = (1.0 / src.alpha()).max(1.0 / src.beta());
    if let Ok(e) = TerminatingChain::build(network).and_then(|c| c.mean_absorption_times()) {
        scale = scale.max(e[0]).max(e[1]);
    }
    ((10.0 * scale).ceil() as u64).clamp(1, MAX_DELTA_CAP)
}

type Cell = [[u64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub counted: u64,
    pub entropy: f64,
    pub estimate_zero: f64,
}

/// Occupancy counts collected by [`run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationStats {
    pub delta_cap: u64,
    /// `counts[delta][xhat][x]` for `delta < delta_cap`.
    pub counts: Vec<Cell>,
    /// Pooled counts for `delta >= delta_cap`.
    pub overflow: Cell,
    /// Deliveries from node 0 after warmup.
    pub receptions: u64,
    pub singletons: u64,
    pub collisions: u64,
    pub idles: u64,
    /// Slots after warmup.
    pub counted_slots: u64,
    pub first_reception_slot: Vec<Option<u64>>,
    pub batches: Vec<BatchSummary>,
    pub tracked_nodes: usize,
}

impl SimulationStats {
    fn new(delta_cap: u64, m: usize, tracked_nodes: usize) -> Self {
        Self {
            delta_cap,
            counts: vec![[[0; 2]; 2]; delta_cap as usize],
            overflow: [[0; 2]; 2],
            receptions: 0,
            singletons: 0,
            collisions: 0,
            idles: 0,
            counted_slots: 0,
            first_reception_slot: vec![None; m],
            batches: Vec::new(),
            tracked_nodes,
        }
    }

    fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.counts.iter().chain(std::iter::once(&self.overflow))
    }

    /// Sum of all occupancy counts.
    pub fn total(&self) -> u64 {
        self.cells().flatten().flatten().sum()
    }

    /// `N(delta, xhat, .)`; ages at or above the cap read the overflow bin.
    pub fn cell_total(&self, delta: u64, xhat: usize) -> u64 {
        let c = self.cell(delta);
        c[xhat][0] + c[xhat][1]
    }

    fn cell(&self, delta: u64) -> &Cell {
        self.counts.get(delta as usize).unwrap_or(&self.overflow)
    }

    /// Empirical `p(delta, xhat)`.
    pub fn joint_mass(&self, delta: u64, xhat: usize) -> f64 {
        self.cell_total(delta, xhat) as f64 / self.total().max(1) as f64
    }

    /// Empirical `p(xhat)`.
    pub fn estimate_occupancy(&self, xhat: usize) -> f64 {
        let n: u64 = self.cells().map(|c| c[xhat][0] + c[xhat][1]).sum();
        n as f64 / self.total().max(1) as f64
    }

    /// Fraction of counted node-slots in which the estimate was wrong.
    pub fn mismatch_fraction(&self) -> f64 {
        let n: u64 = self.cells().map(|c| c[0][1] + c[1][0]).sum();
        n as f64 / self.total().max(1) as f64
    }
}

/// Empirical conditional law with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLaw {
    pub law: ConditionalSourceLaw,
    pub std_error: f64,
    pub samples: u64,
}

fn law_from_cell(c: &[u64; 2], what: impl FnOnce() -> String) -> Result<EmpiricalLaw> {
    let n = c[0] + c[1];
    if n == 0 {
        return Err(Error::InsufficientSamples(what()));
    }
    let p0 = c[0] as f64 / n as f64;
    Ok(EmpiricalLaw {
        law: ConditionalSourceLaw { p0, p1: 1.0 - p0 },
        std_error: (p0 * (1.0 - p0) / n as f64).sqrt(),
        samples: n,
    })
}

/// Empirical `p(x | delta, xhat)` for `delta < delta_cap`.
pub fn empirical_conditional_law(
    stats: &SimulationStats,
    delta: u64,
    xhat: usize,
) -> Result<EmpiricalLaw> {
    if delta >= stats.delta_cap {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!(
                "{delta} is pooled in the overflow bin (cap {})",
                stats.delta_cap
            ),
        });
    }
    law_from_cell(&stats.counts[delta as usize][xhat], || {
        format!("no samples at delta={delta}, xhat={xhat}")
    })
}

/// Empirical law of the pooled `delta >= delta_cap` cell.
pub fn empirical_overflow_law(stats: &SimulationStats, xhat: usize) -> Result<EmpiricalLaw> {
    law_from_cell(&stats.overflow[xhat], || {
        format!("overflow bin empty for xhat={xhat}")
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalEntropy {
    pub bits: f64,
    /// 95% batch-means confidence half-width.
    pub half_width: f64,
    pub batches: usize,
}

fn plug_in_entropy<'a>(cells: impl Iterator<Item = &'a Cell>) -> (f64, u64) {
    let mut acc = 0.0;
    let mut total = 0u64;
    for c in cells {
        for row in c {
            let n = row[0] + row[1];
            if n > 0 {
                acc += n as f64 * binary_entropy(row[0] as f64 / n as f64);
                total += n;
            }
        }
    }
    (if total > 0 { acc / total as f64 } else { 0.0 }, total)
}

/// Two-sided 97.5% Student-t quantile (Cornish-Fisher expansion; exact to
/// about 1e-3 for 10+ degrees of freedom).
pub(crate) fn t_quantile_975(df: usize) -> f64 {
    let z: f64 = 1.959963984540054;
    let n = df.max(1) as f64;
    let z3 = z.powi(3);
    let z5 = z.powi(5);
    let z7 = z.powi(7);
    z + (z3 + z) / (4.0 * n)
        + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * n * n)
        + (3.0 * z7 + 19.0 * z5 + 17.0 * z3 - 15.0 * z) / (384.0 * n.powi(3))
}

fn batch_half_width(values: &[f64]) -> f64 {
    let b = values.len();
    if b < 2 {
        return f64::INFINITY;
    }
    let mean = values.iter().sum::<f64>() / b as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (b - 1) as f64;
    t_quantile_975(b - 1) * (var / b as f64).sqrt()
}

/// Plug-in estimate of `H(X | Delta, Xhat)` over populated cells.
pub fn empirical_average_entropy(stats: &SimulationStats) -> Result<EmpiricalEntropy> {
    let (bits, total) = plug_in_entropy(stats.cells());
    if total == 0 {
        return Err(Error::InsufficientSamples("no counted slots".into()));
    }
    let values: Vec<f64> = stats
        .batches
        .iter()
        .filter(|b| b.counted > 0)
        .map(|b| b.entropy)
        .collect();
    Ok(EmpiricalEntropy {
        bits,
        half_width: batch_half_width(&values),
        batches: values.len(),
    })
}

/// Batch-means half-width for the estimate occupancy `p(xhat = 0)`.
pub fn estimate_occupancy_half_width(stats: &SimulationStats) -> f64 {
    let values: Vec<f64> = stats
        .batches
        .iter()
        .filter(|b| b.counted > 0)
        .map(|b| b.estimate_zero)
        .collect();
    batch_half_width(&values)
}

/// Bernoulli trial against a precomputed 64-bit threshold.
#[derive(Debug, Clone, Copy)]
enum Coin {
    Never,
    Always,
    Below(u64),
}

impl Coin {
    fn new(p: f64) -> Self {
        if p <= 0.0 {
            Coin::Never
        } else if p >= 1.0 {
            Coin::Always
        } else {
            Coin::Below((p * 18_446_744_073_709_551_616.0) as u64)
        }
    }

    #[inline]
    fn flip(self, rng: &mut ChaCha8Rng) -> bool {
        match self {
            Coin::Never => false,
            Coin::Always => true,
            Coin::Below(t) => rng.next_u64() < t,
        }
    }
}

/// Outcome of one channel slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotOutcome {
    Idle,
    Delivered(usize),
    Collision,
}

/// Joint state of all sources, nodes and sink estimates.
struct Network {
    rngs: Vec<ChaCha8Rng>,
    state: Vec<u8>,
    xhat: Vec<u8>,
    delta: Vec<u64>,
    received: Vec<bool>,
    change: [Coin; 2],
    transmit: [[Coin; 2]; 2],
}

impl Network {
    fn new(config: &NetworkConfig, seed: u64) -> Self {
        let m = config.m();
        let src = config.source;
        let pi0 = src.stationary().pi0;
        let init = Coin::new(pi0);
        let mut rngs = Vec::with_capacity(m);
        let mut state = Vec::with_capacity(m);
        for i in 0..m {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            state.push(if init.flip(&mut rng) { 0 } else { 1 });
            rngs.push(rng);
        }
        let l = config.policy;
        Self {
            rngs,
            state,
            xhat: vec![0; m],
            delta: vec![0; m],
            received: vec![false; m],
            change: [Coin::new(src.alpha()), Coin::new(src.beta())],
            transmit: [
                [Coin::new(l.get(0, 0)), Coin::new(l.get(0, 1))],
                [Coin::new(l.get(1, 0)), Coin::new(l.get(1, 1))],
            ],
        }
    }

    fn step(&mut self) -> SlotOutcome {
        let mut senders = 0u32;
        let mut sender = 0;
        for i in 0..self.state.len() {
            let rng = &mut self.rngs[i];
            let prev = self.state[i] as usize;
            let cur = if self.change[prev].flip(rng) {
                1 - prev
            } else {
                prev
            };
            self.state[i] = cur as u8;
            if self.transmit[prev][cur].flip(rng) {
                senders += 1;
                sender = i;
            }
        }
        for d in self.delta.iter_mut() {
            *d = d.saturating_add(1);
        }
        match senders {
            0 => SlotOutcome::Idle,
            1 => {
                self.xhat[sender] = self.state[sender];
                self.delta[sender] = 0;
                self.received[sender] = true;
                SlotOutcome::Delivered(sender)
            }
            _ => SlotOutcome::Collision,
        }
    }
}

/// Simulate `config.slots` slots and collect occupancy statistics.
pub fn run(config: &SimConfig) -> Result<SimulationStats> {
    config.validate()?;
    let net_cfg = &config.network;
    let m = net_cfg.m();
    let tracked = if config.track_all_nodes { m } else { 1 };
    let mut net = Network::new(net_cfg, config.seed);
    let mut stats = SimulationStats::new(config.delta_cap, m, tracked);
    let cap = config.delta_cap;

    let counted_total = config.slots - config.warmup;
    let batch_len = counted_total / config.batches as u64;
    let mut batch: Vec<Cell> = vec![[[0; 2]; 2]; cap as usize + 1];
    let mut batch_slots = 0u64;

    for slot in 0..config.slots {
        let outcome = net.step();
        if let SlotOutcome::Delivered(i) = outcome {
            stats.first_reception_slot[i].get_or_insert(slot);
        }
        if slot < config.warmup {
            continue;
        }
        stats.counted_slots += 1;
        match outcome {
            SlotOutcome::Idle => stats.idles += 1,
            SlotOutcome::Collision => stats.collisions += 1,
            SlotOutcome::Delivered(i) => {
                stats.singletons += 1;
                if i == 0 {
                    stats.receptions += 1;
                }
            }
        }
        for i in 0..tracked {
            if !net.received[i] {
                continue;
            }
            let d = net.delta[i].min(cap) as usize;
            batch[d][net.xhat[i] as usize][net.state[i] as usize] += 1;
        }
        batch_slots += 1;
        // the last batch absorbs the remainder
        let last = stats.batches.len() + 1 == config.batches;
        if (!last && batch_slots == batch_len) || stats.counted_slots == counted_total {
            flush_batch(&mut stats, &mut batch);
            batch_slots = 0;
        }
    }
    Ok(stats)
}

fn flush_batch(stats: &mut SimulationStats, batch: &mut [Cell]) {
    let (entropy, counted) = plug_in_entropy(batch.iter());
    let zero: u64 = batch.iter().map(|c| c[0][0] + c[0][1]).sum();
    let (body, overflow) = batch.split_at_mut(stats.delta_cap as usize);
    for (dst, src) in stats.counts.iter_mut().zip(body.iter()) {
        for a in 0..2 {
            for b in 0..2 {
                dst[a][b] += src[a][b];
            }
        }
    }
    for a in 0..2 {
        for b in 0..2 {
            stats.overflow[a][b] += overflow[0][a][b];
        }
    }
    stats.batches.push(BatchSummary {
        counted,
        entropy,
        estimate_zero: if counted > 0 {
            zero as f64 / counted as f64
        } else {
            0.0
        },
    });
    batch.iter_mut().for_each(|c| *c = [[0; 2]; 2]);
}

/// One slot of a sampled node trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub slot: u64,
    pub state: usize,
    /// `None` until the first delivery from the node.
    pub delta: Option<u64>,
    pub xhat: Option<usize>,
    /// Analytical `h(delta, xhat)`.
    pub entropy: Option<f64>,
    pub outcome: SlotOutcome,
}

/// Record `slots` consecutive slots of `node`'s trajectory, after
/// `config.warmup` unrecorded slots, with the analytical uncertainty the
/// sink would compute at each slot.
pub fn sample_timeline(config: &SimConfig, node: usize, slots: u64) -> Result<Vec<SampleRow>> {
    let m = config.network.m();
    if node >= m {
        return Err(Error::InvalidParameter {
            name: "node",
            reason: format!("{node} out of range for m={m}"),
        });
    }
    let chain = TerminatingChain::build(&config.network)?;
    let mut net = Network::new(&config.network, config.seed);
    for _ in 0..config.warmup {
        net.step();
    }
    let mut row = [0.0; 2];
    if net.received[node] {
        // continue an interval already in progress
        row = crate::analysis::conditional_source_law(
            &chain,
            net.delta[node],
            net.xhat[node] as usize,
        )
        .map(|l| [l.p0, l.p1])?;
    }
    let mut out = Vec::with_capacity(slots as usize);
    for k in 0..slots {
        let outcome = net.step();
        let delivered = outcome == SlotOutcome::Delivered(node);
        let (delta, xhat, entropy) = if !net.received[node] {
            (None, None, None)
        } else if delivered {
            row = if net.xhat[node] == 0 {
                [1.0, 0.0]
            } else {
                [0.0, 1.0]
            };
            (Some(0), Some(net.xhat[node] as usize), Some(0.0))
        } else {
            let w = chain.step(row);
            let s = w[0] + w[1];
            row = [w[0] / s, w[1] / s];
            (
                Some(net.delta[node]),
                Some(net.xhat[node] as usize),
                Some(binary_entropy(row[0])),
            )
        };
        out.push(SampleRow {
            slot: config.warmup + k,
            state: net.state[node] as usize,
            delta,
            xhat,
            entropy,
            outcome,
        });
    }
    Ok(out)
}
