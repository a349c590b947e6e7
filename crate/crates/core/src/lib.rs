//! Receiver uncertainty when tracking two-state Markov sources over a
//! feedback-free slotted ALOHA channel.
//!
//! Each of `m` nodes observes an independent two-state Markov chain and
//! transmits its current state with a probability that depends on the last
//! source transition. The sink keeps the last value it decoded from each
//! node. This crate computes, analytically and by exact simulation, the
//! conditional entropy `H(X | Delta, Xhat)` of a source given the age of
//! information and the current estimate, and searches for access policies
//! that minimize it.
//!
//! | module | contents |
//! |--------|----------|
//! | [`source`] | source parameters, stationary law, transition budgets |
//! | [`policy`] | access policies and mean-field channel quantities |
//! | [`analysis`] | terminating chain, AoI/estimate laws, entropies |
//! | [`optimizer`] | balanced policy search and parameter sweeps |
//! | [`simulator`] | exact multi-node Monte Carlo |
//! | [`experiment`] | CLI driver, CSV output, figure recipes |

pub mod analysis;
pub mod error;
pub mod experiment;
pub mod optimizer;
pub mod policy;
pub mod simulator;
pub mod source;

pub use error::{Error, Result};
pub use policy::{AccessPolicy, NetworkConfig};
pub use source::{SourceParams, StationaryLaw};
