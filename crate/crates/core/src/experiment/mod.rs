//! Experiment driver: parameter resolution, CSV output, figure recipes,
//! validation reports and the command-line front end.
//!
//! All analytic output is a pure function of the resolved parameters, and
//! all simulated output a pure function of the parameters and the seed, so
//! reruns reproduce files byte for byte whatever the worker count.

mod cli;
mod modes;
mod output;
mod params;
mod recipes;
mod validate;

pub use cli::{fail, run_cli, workers_from_env, WORKERS_ENV};
pub use modes::{execute, Mode};
pub use output::{format_float, read_provenance, Table};
pub use params::{Count, List, Params, PolicySpec};
pub use recipes::{emit_figure_data, Figure, FigureRecipe, FIG4_NODES, FIG5_NODES, FIG6_ETAS};
pub use validate::{
    compare, validate, Check, ValidationReport, CONDITIONAL_LAW_TOLERANCE, DEFAULT_MAX_DELTA,
    ENTROPY_TOLERANCE, ESTIMATE_TOLERANCE, JOINT_LAW_TOLERANCE,
};
