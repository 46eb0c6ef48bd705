use thiserror::Error;

use crate::fitting::FitResult;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("{name} = {value} is outside the domain ({expected})")]
    Domain { name: &'static str, value: f64, expected: &'static str },

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("period {period} is absorbing and has infinite mean duration")]
    InfiniteDuration { period: usize },

    #[error("correlation undefined: every period has zero intensity")]
    UndefinedCorrelation,

    #[error("singular expression: {0}")]
    Singular(String),

    #[error("unphysical coupling: {0}")]
    UnphysicalCoupling(String),

    #[error("steady state is not unique ({zero_modes} zero modes)")]
    NonUniqueSteadyState { zero_modes: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("insufficient statistics: {found} photons, need at least {needed}")]
    InsufficientStatistics { found: usize, needed: usize },

    #[error("fit did not converge after {iterations} iterations (chi2/dof = {})", best.chi2_per_dof)]
    NonConvergence { iterations: usize, best: Box<FitResult> },

    #[error("normal matrix is singular; unidentifiable direction involves: {}", directions.join(", "))]
    Unidentifiable { directions: Vec<String> },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain { name, value, expected }
}
