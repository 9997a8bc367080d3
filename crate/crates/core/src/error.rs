use thiserror::Error;

use crate::solver::{DependenceReport, SolverReport};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("mean-zero violation: input mean {mean:e} is not zero")]
    MeanZero { mean: f64 },

    #[error("oracle validity: {0}")]
    OracleValidity(String),

    #[error("constraint violation: {0}")]
    Constraint(String),

    #[error("solver stalled after {} iterations (residual {:e})", .0.iterations, .0.residual)]
    SolverStall(Box<SolverReport>),

    #[error("experiment aborted: {reason}")]
    ExperimentAborted {
        reason: String,
        partial: Box<DependenceReport>,
    },

    #[error("invalid grid-field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
