use std::io;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point is at the north pole and has no stereographic image")]
    NorthPole,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is numerically singular (pivot {pivot:e} at column {column})")]
    SingularMatrix { pivot: f64, column: usize },

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("rejection sampler exceeded {proposals} proposals at step {step}")]
    RejectionBudgetExceeded { step: usize, proposals: u64 },

    #[error("expected Riesz s-energy is infinite for s = {s}")]
    InfiniteEnergy { s: f64 },

    #[error("points {i} and {j} coincide (distance {distance:e})")]
    CoincidentPoints { i: usize, j: usize, distance: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("statistic `{0}` has no exact counterpart for this sampler")]
    UnboundStatistic(String),

    #[error("candidate-exact discrepancy is limited to n <= {limit}, got n = {n}")]
    CandidateLimit { n: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
