use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "transition budget {budget} infeasible for eta={eta}, m={m}: alpha={alpha}, beta={beta}"
    )]
    BudgetInfeasible {
        eta: f64,
        m: usize,
        budget: f64,
        alpha: f64,
        beta: f64,
    },

    #[error("channel load {target} cannot be reached: {reason}")]
    LoadInfeasible { target: f64, reason: String },

    /// No update from the reference node can ever be delivered.
    #[error("degenerate access policy: absorption vector is zero")]
    DegeneratePolicy,

    /// The pair (delta, xhat) has zero probability.
    #[error("(delta={delta}, xhat={xhat}) is unreachable")]
    UnreachableCondition { delta: u64, xhat: usize },

    #[error("I - A is numerically singular (det = {det:e})")]
    SingularFundamentalMatrix { det: f64 },

    #[error("required horizon {needed} exceeds the limit of {limit} slots")]
    HorizonExceeded { needed: f64, limit: u64 },

    #[error("no feasible, non-degenerate policy among the candidates")]
    NoFeasiblePolicy,

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Name of the subsystem the error originates from, used in CLI error records.
    pub fn module(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "parameters",
            Error::BudgetInfeasible { .. } => "source-model",
            Error::LoadInfeasible { .. } => "access-policy",
            Error::DegeneratePolicy
            | Error::UnreachableCondition { .. }
            | Error::SingularFundamentalMatrix { .. }
            | Error::HorizonExceeded { .. } => "uncertainty-analysis",
            Error::NoFeasiblePolicy => "policy-optimizer",
            Error::InsufficientSamples(_) => "network-simulator",
            Error::Config(_) | Error::Io(_) => "experiment-cli",
        }
    }

    /// Short machine-readable kind tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::BudgetInfeasible { .. } => "BudgetInfeasible",
            Error::LoadInfeasible { .. } => "LoadInfeasible",
            Error::DegeneratePolicy => "DegeneratePolicy",
            Error::UnreachableCondition { .. } => "UnreachableCondition",
            Error::SingularFundamentalMatrix { .. } => "SingularFundamentalMatrix",
            Error::HorizonExceeded { .. } => "HorizonExceeded",
            Error::NoFeasiblePolicy => "NoFeasiblePolicy",
            Error::InsufficientSamples(_) => "InsufficientSamples",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
