use thiserror::Error;

/// Failures reported by the numerical routines.
///
/// Input validation problems and solver failures are kept apart so that the
/// command line front end can map them onto different exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("work budget exceeded: {needed:.3e} candidate points, budget {budget}")]
    BudgetExceeded { needed: f64, budget: u64 },

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("argument s = {s} is within {distance:.1e} of a pole")]
    Pole { s: f64, distance: f64 },

    #[error("{0} diverges at this parameter point")]
    Divergent(&'static str),

    #[error("degenerate fit: running supremum has only {increases} strict increases")]
    DegenerateFit { increases: usize },

    #[error("no root for {what}: {detail}")]
    NoRoot { what: &'static str, detail: String },

    #[error("scenario mismatch: {0}")]
    ScenarioMismatch(String),
}

impl Error {
    /// True for errors caused by the caller's parameters rather than by a
    /// numerical procedure failing.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::ScenarioMismatch(_) | Error::BudgetExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
