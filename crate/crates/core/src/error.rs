use thiserror::Error;

use crate::schedules::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("config domain {got:?} does not match model domain {expected:?}")]
    Domain {
        expected: crate::ising::Domain,
        got: crate::ising::Domain,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{n} variables exceeds the limit of {limit} for {what}")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("invalid schedule: {}", format_violations(.0))]
    Schedule(Vec<Violation>),

    #[error("time {t} outside schedule range [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("invalid anneal functions: {0}")]
    AnnealFunctions(String),

    #[error("simulation failed: {0}")]
    Simulation(String),

    #[error("kernel matrix is not positive definite after jitter {jitter:e}")]
    SingularKernel { jitter: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
