use thiserror::Error;

/// Errors produced anywhere in the fair-clustering toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid fairness profile: {0}")]
    InvalidProfile(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("LP solver failure: {0}")]
    Solver(String),

    /// Iterative rounding made no progress in one pass. With a vertex
    /// solution this cannot happen, so it signals a solver-contract violation.
    #[error(
        "iterative rounding stalled at iteration {iteration}: {} fractional variables remain, {active_rows} rows active",
        fractional.len()
    )]
    RoundingStall {
        iteration: usize,
        active_rows: usize,
        /// `(client, facility, value)` for every strictly fractional variable.
        fractional: Vec<(usize, usize, f64)>,
    },

    #[error("enumeration guard exceeded: about {states} states, guard is {guard}")]
    GuardExceeded { states: u128, guard: u128 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Configuration problems map to exit code 1 in the CLI.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidInstance(_) | Error::InvalidProfile(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
