use thiserror::Error;

use crate::fixed_point::{Branch, Region};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the quantity being computed.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative procedure ran out of budget. `last` is the final iterate.
    #[error("{what} did not converge after {iterations} iterations (last iterate {last})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last: f64,
    },

    #[error("the {branch:?} root does not exist in the {region:?} region")]
    BranchNotPresent { branch: Branch, region: Region },

    /// A bracketing solver was handed an interval without a sign change.
    #[error("no sign change on [{lo}, {hi}] while solving {what}")]
    Bracket { what: &'static str, lo: f64, hi: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
