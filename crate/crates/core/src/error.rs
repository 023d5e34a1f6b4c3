use thiserror::Error;

use crate::models::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("time {t} outside grid [{t0}, {tf}]")]
    OutOfRange { t: f64, t0: f64, tf: f64 },

    #[error("{what}: expected dimension {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("degenerate population: N = {population} at t = {t}")]
    DegeneratePopulation { t: f64, population: f64 },

    #[error("invalid parameters: {0}")]
    Validation(ValidationReport),

    #[error("non-finite {what} at t = {t}{}", iteration.map(|i| format!(" (iteration {i})")).unwrap_or_default())]
    NonFinite {
        what: &'static str,
        t: f64,
        iteration: Option<usize>,
    },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("scenario: {0}")]
    Scenario(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
