use thiserror::Error;

use crate::integrator::Trajectory;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid structural parameters: {0}")]
    InvalidParams(String),

    #[error("invalid raw parameters: {0}")]
    InvalidRawParams(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate state (u = {u}): the singular control divides by u")]
    DegenerateState { u: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t}")]
    StepBudget {
        max_steps: usize,
        t: f64,
        partial: Box<Trajectory>,
    },

    #[error("separatrix trace failed: {0}")]
    Trace(String),

    #[error("operation requires {expected}, got rho = {rho}")]
    Regime { expected: &'static str, rho: f64 },

    #[error("{name} = {value} outside admissible range ({lo}, {hi})")]
    Range {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("event not reached before t_max = {t_max}: {what}")]
    EventNotReached { what: &'static str, t_max: f64 },

    #[error("search exhausted after {attempts} attempts: {what}")]
    SearchExhausted { what: &'static str, attempts: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
