//! Command-line grammar: `aloha-entropy <mode> [--key value]... [--config path]`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::modes::{execute, Mode};
use super::params::Params;
use super::recipes::Figure;
use crate::error::{Error, Result};

/// Environment variable selecting the worker-pool size.
pub const WORKERS_ENV: &str = "ALOHA_ENTROPY_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "aloha-entropy",
    version,
    about = "Receiver uncertainty of Markov sources over slotted ALOHA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ModeArgs {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: Params,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytical entropy and channel quantities for one policy.
    Analyze(ModeArgs),
    /// Exact network simulation; per-cell occupancy counts.
    Simulate(ModeArgs),
    /// Search for the entropy-minimizing policy.
    Optimize(ModeArgs),
    /// Strategies across network sizes.
    SweepNodes(ModeArgs),
    /// Strategies across source asymmetries at a fixed transition budget.
    SweepAsymmetry(ModeArgs),
    /// Compare analysis and simulation; JSON report.
    Validate(ModeArgs),
    /// Per-slot trajectory of one node with its instantaneous entropy.
    Timeline(ModeArgs),
    /// Data behind one of the figures (fig2 ... fig6).
    Figure {
        name: Figure,
        #[command(flatten)]
        args: ModeArgs,
    },
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    module: &'a str,
    message: String,
}

fn report(kind: &str, module: &str, message: String) {
    let record = ErrorRecord {
        error: ErrorBody {
            kind,
            module,
            message,
        },
    };
    let line = serde_json::to_string(&record).expect("error record serializes");
    let _ = writeln!(std::io::stderr().lock(), "{line}");
}

/// Parse `ALOHA_ENTROPY_WORKERS`; unset or empty means all cores.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{WORKERS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Config(format!("{WORKERS_ENV}: {e}"))),
    }
}

/// Print a JSON error record for `e` on standard error and return the exit code.
pub fn fail(e: &Error) -> i32 {
    report(e.kind(), e.module(), e.to_string());
    if matches!(e, Error::Config(_)) {
        2
    } else {
        1
    }
}

/// Run the tool with `args` (program name first) on a pool of `workers`
/// threads (all cores when `None`). Returns the process exit code.
pub fn run_cli<I, T>(args: I, workers: Option<usize>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            report(
                "ConfigError",
                "experiment-cli",
                e.render().to_string().trim().to_string(),
            );
            return 2;
        }
    };
    let (mode, args) = match cli.command {
        Command::Analyze(a) => (Mode::Analyze, a),
        Command::Simulate(a) => (Mode::Simulate, a),
        Command::Optimize(a) => (Mode::Optimize, a),
        Command::SweepNodes(a) => (Mode::SweepNodes, a),
        Command::SweepAsymmetry(a) => (Mode::SweepAsymmetry, a),
        Command::Validate(a) => (Mode::Validate, a),
        Command::Timeline(a) => (Mode::Timeline, a),
        Command::Figure { name, args } => (Mode::Figure(name), args),
    };
    let result = merged(&args).and_then(|params| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.unwrap_or(0))
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| execute(mode, &params))
    });
    match result {
        Ok(()) => 0,
        Err(e) => fail(&e),
    }
}

fn merged(args: &ModeArgs) -> Result<Params> {
    match &args.config {
        Some(path) => Ok(args.params.merged_over(&Params::from_file(path)?)),
        None => Ok(args.params.clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn grammar_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn parses_scientific_counts_and_figures() {
        let cli = Cli::try_parse_from([
            "aloha-entropy",
            "figure",
            "fig3",
            "--slots",
            "1e7",
            "--seed",
            "7",
        ])
        .unwrap();
        let Command::Figure { name, args } = cli.command else {
            panic!()
        };
        assert_eq!(name, Figure::Fig3);
        assert_eq!(args.params.slots.unwrap().0, 10_000_000);
        assert!(Cli::try_parse_from(["aloha-entropy", "figure", "fig9"]).is_err());
    }

    #[test]
    fn usage_errors_exit_nonzero() {
        assert_eq!(
            run_cli(["aloha-entropy", "analyze", "--m", "ten"], Some(1)),
            2
        );
        assert_eq!(
            run_cli(["aloha-entropy", "analyze", "--m", "5"], Some(1)),
            2
        );
        assert_eq!(
            run_cli(
                ["aloha-entropy", "analyze", "--m", "5", "--slots", "9"],
                Some(1)
            ),
            2
        );
    }
}
