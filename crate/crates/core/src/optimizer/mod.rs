//! Search for access policies that minimize the average conditional entropy.
//!
//! The search runs in two phases: an exhaustive grid over the unit box (or
//! over a constant-load slice of it), followed by box-projected Nelder-Mead
//! refinement from the best few grid points. Grid evaluations run on the
//! current rayon pool; results are merged in grid order, so the outcome never
//! depends on the number of workers.

mod nelder_mead;
mod sweep;

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::average_conditional_entropy;
use crate::error::{Error, Result};
use crate::policy::{access_weights, AccessPolicy, NetworkConfig};
use crate::source::SourceParams;

pub use sweep::{sweep_asymmetry, sweep_nodes, Strategy, SweepCell, SweepRow, SweepSettings};

pub(crate) use sweep::policy_for;

use nelder_mead::{minimize, NelderMeadOptions};

pub const DEFAULT_GRID_RESOLUTION: usize = 11;
pub const DEFAULT_REFINE_BUDGET: usize = 500;

/// Tail-mass tolerance of the objective while searching.
pub const SEARCH_TOLERANCE: f64 = 1e-9;
/// Tolerance used to score the final policy.
pub const FINAL_TOLERANCE: f64 = 1e-12;

/// Number of grid points that seed a local refinement.
const STARTS: usize = 3;
/// Objectives closer than this are ties, resolved lexicographically.
const TIE: f64 = 1e-12;
/// Coordinates this close to a face are tried on the face after refinement.
const SNAP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "target", rename_all = "kebab-case")]
pub enum LoadConstraint {
    None,
    /// Channel load `m * mean_access` fixed to the given packets per slot.
    FixedLoad(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationProblem {
    pub m: usize,
    pub source: SourceParams,
    pub constraint: LoadConstraint,
    pub grid_resolution: usize,
    pub refine_budget: usize,
    pub seed: u64,
}

impl OptimizationProblem {
    pub fn new(m: usize, source: SourceParams) -> Self {
        Self {
            m,
            source,
            constraint: LoadConstraint::None,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            refine_budget: DEFAULT_REFINE_BUDGET,
            seed: 0,
        }
    }

    pub fn with_load(mut self, target: f64) -> Self {
        self.constraint = LoadConstraint::FixedLoad(target);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: "must be at least 1".into(),
            });
        }
        if self.grid_resolution < 2 {
            return Err(Error::InvalidParameter {
                name: "grid_resolution",
                reason: format!("must be at least 2, got {}", self.grid_resolution),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub policy: AccessPolicy,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub policy: AccessPolicy,
    /// Average conditional entropy of `policy`, in bits.
    pub objective: f64,
    /// Objective evaluations spent, grid included.
    pub evaluations: usize,
    /// Accepted improvements, in order; objectives strictly decrease.
    pub trace: Vec<TracePoint>,
}

/// Minimize the average conditional entropy over the feasible policies of
/// `problem`. A fixed-load constraint is honored if present.
pub fn optimize(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    problem.validate()?;
    let space = match problem.constraint {
        LoadConstraint::None => Space::Free,
        LoadConstraint::FixedLoad(target) => Space::slice(problem, target)?,
    };
    Search::new(problem, space).run()
}

/// Like [`optimize`] but requires a fixed-load constraint.
pub fn optimize_constrained(problem: &OptimizationProblem) -> Result<OptimizationResult> {
    match problem.constraint {
        LoadConstraint::FixedLoad(_) => optimize(problem),
        LoadConstraint::None => Err(Error::InvalidParameter {
            name: "constraint",
            reason: "a fixed-load target is required".into(),
        }),
    }
}

/// Parameterization of the feasible set by free coordinates in `[0, 1]^d`.
#[derive(Debug, Clone)]
enum Space {
    Free,
    /// `l[k]` solves `w . l = level` given the other coordinates.
    Slice {
        k: usize,
        weights: [f64; 4],
        level: f64,
    },
}

impl Space {
    fn slice(problem: &OptimizationProblem, target: f64) -> Result<Self> {
        let m = problem.m as f64;
        if !target.is_finite() || target < 0.0 || target > m {
            return Err(Error::LoadInfeasible {
                target,
                reason: format!("load must lie in [0, {m}]"),
            });
        }
        let weights = access_weights(&problem.source);
        let k = (0..4)
            .max_by(|&i, &j| weights[i].total_cmp(&weights[j]).then(j.cmp(&i)))
            .unwrap();
        Ok(Self::Slice {
            k,
            weights,
            level: target / m,
        })
    }

    fn dims(&self) -> usize {
        match self {
            Space::Free => 4,
            Space::Slice { .. } => 3,
        }
    }

    fn policy(&self, x: &[f64]) -> Option<[f64; 4]> {
        match *self {
            Space::Free => Some([x[0], x[1], x[2], x[3]]),
            Space::Slice { k, weights, level } => {
                let mut l = [0.0; 4];
                let mut rest = level;
                let mut free = x.iter();
                for i in (0..4).filter(|&i| i != k) {
                    l[i] = *free.next().unwrap();
                    rest -= weights[i] * l[i];
                }
                let v = rest / weights[k];
                if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                    return None;
                }
                l[k] = v.clamp(0.0, 1.0);
                Some(l)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    x: [f64; 4],
    policy: [f64; 4],
    f: f64,
}

fn lex(a: &[f64; 4], b: &[f64; 4]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

struct Search<'a> {
    problem: &'a OptimizationProblem,
    space: Space,
    evaluations: usize,
    trace: Vec<TracePoint>,
}

impl<'a> Search<'a> {
    fn new(problem: &'a OptimizationProblem, space: Space) -> Self {
        Self {
            problem,
            space,
            evaluations: 0,
            trace: Vec::new(),
        }
    }

    fn score(&self, policy: [f64; 4], tolerance: f64) -> Option<f64> {
        let policy = AccessPolicy::from_array(policy).ok()?;
        if policy.is_zero() {
            return None;
        }
        let config = NetworkConfig::new(self.problem.m, self.problem.source, policy).ok()?;
        average_conditional_entropy(&config, tolerance)
            .ok()
            .map(|h| h.bits)
    }

    fn evaluate(&mut self, x: &[f64]) -> Option<Candidate> {
        let policy = self.space.policy(x)?;
        self.evaluations += 1;
        let f = self.score(policy, SEARCH_TOLERANCE)?;
        let mut padded = [0.0; 4];
        padded[..x.len()].copy_from_slice(x);
        Some(Candidate {
            x: padded,
            policy,
            f,
        })
    }

    fn accept(&mut self, c: &Candidate) {
        let better = self.trace.last().is_none_or(|best| c.f < best.objective);
        if better {
            self.trace.push(TracePoint {
                policy: AccessPolicy::from_array(c.policy).expect("policy in the unit box"),
                objective: c.f,
            });
        }
    }

    fn grid(&mut self) -> Vec<Candidate> {
        let res = self.problem.grid_resolution;
        let d = self.space.dims();
        let total = res.pow(d as u32);
        let step = 1.0 / (res - 1) as f64;
        let points: Vec<Vec<f64>> = (0..total)
            .map(|mut idx| {
                let mut x = vec![0.0; d];
                for slot in x.iter_mut().rev() {
                    *slot = (idx % res) as f64 * step;
                    idx /= res;
                }
                x
            })
            .collect();
        let scored: Vec<(bool, Option<Candidate>)> = points
            .par_iter()
            .map(|x| {
                let Some(policy) = self.space.policy(x) else {
                    return (false, None);
                };
                let mut padded = [0.0; 4];
                padded[..d].copy_from_slice(x);
                let cand = self.score(policy, SEARCH_TOLERANCE).map(|f| Candidate {
                    x: padded,
                    policy,
                    f,
                });
                (true, cand)
            })
            .collect();
        self.evaluations += scored.iter().filter(|(evaluated, _)| *evaluated).count();
        scored.into_iter().filter_map(|(_, c)| c).collect()
    }

    fn run(mut self) -> Result<OptimizationResult> {
        let mut cands = self.grid();
        if cands.is_empty() {
            return Err(Error::NoFeasiblePolicy);
        }
        cands.sort_by(|a, b| a.f.total_cmp(&b.f).then_with(|| lex(&a.policy, &b.policy)));
        let floor = cands[0].f;
        let winner = *cands
            .iter()
            .take_while(|c| c.f <= floor + TIE)
            .min_by(|a, b| lex(&a.policy, &b.policy))
            .unwrap();
        self.accept(&winner);
        let mut best = winner;

        let d = self.space.dims();
        let spacing = 1.0 / (self.problem.grid_resolution - 1) as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(self.problem.seed);
        let starts: Vec<Candidate> = cands.iter().take(STARTS).copied().collect();
        let per_start = self.problem.refine_budget / starts.len().max(1);
        if per_start > d + 1 {
            for start in starts {
                let steps: Vec<f64> = (0..d)
                    .map(|_| spacing * (0.5 + 0.5 * rng.random::<f64>()))
                    .collect();
                let opts = NelderMeadOptions {
                    max_evals: per_start,
                    ..Default::default()
                };
                let mut improvements = Vec::new();
                let space = self.space.clone();
                let out = minimize(
                    |x| match space.policy(x) {
                        Some(p) => self.score(p, SEARCH_TOLERANCE).unwrap_or(f64::INFINITY),
                        None => f64::INFINITY,
                    },
                    &start.x[..d],
                    &steps,
                    &opts,
                    |x, f| {
                        if f.is_finite() {
                            improvements.push((x.to_vec(), f));
                        }
                    },
                );
                self.evaluations += out.evals;
                debug_assert!(
                    !out.f.is_finite()
                        || improvements.iter().any(|(x, f)| *f == out.f && *x == out.x)
                );
                for (x, f) in improvements {
                    if f < best.f {
                        let mut padded = [0.0; 4];
                        padded[..d].copy_from_slice(&x);
                        best = Candidate {
                            x: padded,
                            policy: self.space.policy(&x).unwrap(),
                            f,
                        };
                        self.accept(&best);
                    }
                }
            }
            best = self.polish(best);
        }

        let policy = AccessPolicy::from_array(best.policy)?;
        let config = NetworkConfig::new(self.problem.m, self.problem.source, policy)?;
        let objective = average_conditional_entropy(&config, FINAL_TOLERANCE)?.bits;
        Ok(OptimizationResult {
            policy,
            objective,
            evaluations: self.evaluations,
            trace: self.trace,
        })
    }

    /// Move coordinates that ended up next to a face onto it, one at a time,
    /// whenever that does not make things worse beyond a tie.
    fn polish(&mut self, mut best: Candidate) -> Candidate {
        let d = self.space.dims();
        for i in 0..d {
            let v = best.x[i];
            let face = if v < SNAP {
                0.0
            } else if v > 1.0 - SNAP {
                1.0
            } else {
                continue;
            };
            if v == face {
                continue;
            }
            let mut x = best.x;
            x[i] = face;
            if let Some(c) = self.evaluate(&x[..d]) {
                if c.f <= best.f + TIE {
                    if c.f < best.f {
                        self.accept(&c);
                    }
                    best = c;
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::mean_access_probability;

    fn sym(a: f64) -> SourceParams {
        SourceParams::symmetric(a).unwrap()
    }

    fn objective(m: usize, s: SourceParams, p: AccessPolicy) -> f64 {
        let cfg = NetworkConfig::new(m, s, p).unwrap();
        average_conditional_entropy(&cfg, FINAL_TOLERANCE)
            .unwrap()
            .bits
    }

    fn quick(m: usize, s: SourceParams) -> OptimizationProblem {
        OptimizationProblem {
            grid_resolution: 6,
            refine_budget: 150,
            ..OptimizationProblem::new(m, s)
        }
    }

    #[test]
    fn small_symmetric_network_is_reactive() {
        let res = optimize(&quick(10, sym(0.02))).unwrap();
        let [a, b, c, d] = res.policy.as_array();
        assert!(a <= 0.02 && d <= 0.02, "{}", res.policy);
        assert!(b >= 0.98 && c >= 0.98, "{}", res.policy);
        let reactive = objective(10, sym(0.02), AccessPolicy::reactive());
        assert!(res.objective <= reactive + 1e-9);
    }

    #[test]
    fn result_is_rescored_and_trace_decreases() {
        let s = SourceParams::new(0.05, 0.02).unwrap();
        let res = optimize(&quick(30, s)).unwrap();
        assert!((res.objective - objective(30, s, res.policy)).abs() <= 1e-10);
        assert!(res
            .trace
            .windows(2)
            .all(|w| w[1].objective < w[0].objective));
        assert!(res.evaluations >= 6usize.pow(4) - 1);
    }

    #[test]
    fn deterministic_given_seed() {
        let p = OptimizationProblem {
            seed: 9,
            ..quick(40, sym(0.03))
        };
        assert_eq!(optimize(&p).unwrap(), optimize(&p).unwrap());
    }

    #[test]
    fn grid_only_when_no_budget() {
        let p = OptimizationProblem {
            refine_budget: 0,
            grid_resolution: 3,
            ..OptimizationProblem::new(5, sym(0.1))
        };
        let res = optimize(&p).unwrap();
        assert_eq!(res.trace.len(), 1);
        assert!(res
            .policy
            .as_array()
            .iter()
            .all(|v| [0.0, 0.5, 1.0].contains(v)));
        let mirror = objective(5, sym(0.1), res.policy.mirrored());
        assert!((mirror - res.objective).abs() < 1e-10);
    }

    #[test]
    fn invalid_problems() {
        let mut p = OptimizationProblem::new(5, sym(0.1));
        p.grid_resolution = 1;
        assert!(matches!(optimize(&p), Err(Error::InvalidParameter { .. })));
        let p = OptimizationProblem::new(5, sym(0.1));
        assert!(optimize_constrained(&p).is_err());
        assert!(matches!(
            optimize(&p.clone().with_load(6.0)),
            Err(Error::LoadInfeasible { .. })
        ));
        assert!(matches!(
            optimize(&p.clone().with_load(-0.1)),
            Err(Error::LoadInfeasible { .. })
        ));
        assert_eq!(
            optimize(&quick(5, sym(0.1)).with_load(0.0)),
            Err(Error::NoFeasiblePolicy)
        );
    }

    #[test]
    fn constrained_search_holds_load() {
        let s = sym(0.02);
        let p = quick(50, s).with_load(1.0);
        let res = optimize_constrained(&p).unwrap();
        let load = 50.0 * mean_access_probability(&s, &res.policy);
        assert!((load - 1.0).abs() < 1e-9, "{load}");
        let free = optimize(&quick(50, s)).unwrap();
        assert!(res.objective >= free.objective - 1e-9);
    }

    #[test]
    fn constrained_at_reactive_load_matches_reactive() {
        let s = sym(0.02);
        let target = 20.0 * mean_access_probability(&s, &AccessPolicy::reactive());
        let res = optimize_constrained(&quick(20, s).with_load(target)).unwrap();
        assert!(res.objective <= objective(20, s, AccessPolicy::reactive()) + 1e-9);
    }

    #[test]
    fn slice_eliminates_heaviest_coordinate() {
        let s = SourceParams::new(0.1, 0.01).unwrap();
        let space = Space::slice(&OptimizationProblem::new(10, s), 0.5).unwrap();
        let Space::Slice { k, weights, level } = space else {
            panic!()
        };
        assert_eq!(k, 3);
        let l = space.policy(&[0.2, 0.3, 0.4]).unwrap();
        let lbar: f64 = weights.iter().zip(l).map(|(w, l)| w * l).sum();
        assert!((lbar - level).abs() < 1e-15);
        assert!(space.policy(&[1.0, 1.0, 1.0]).is_none());
    }
}
