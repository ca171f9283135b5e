use thiserror::Error;

use crate::mdp::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model:\n{0}")]
    InvalidModel(ValidationReport),

    #[error("action {action} is not admissible in state {state}")]
    InadmissibleAction { state: usize, action: usize },

    #[error("state {state} is an end state and accepts no action")]
    EndStateAction { state: usize },

    #[error("policy has no action for state {state} at step {step}")]
    PolicyUndefined { step: usize, state: usize },

    #[error("policy shape mismatch: {0}")]
    PolicyShape(String),

    #[error("end index {index} outside 1..={n}")]
    EndIndexOutOfRange { index: usize, n: usize },

    #[error("tau = {tau} outside {range}")]
    TauOutOfRange { tau: f64, range: &'static str },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("empty sample")]
    EmptySample,

    #[error("policy space holds {count} policies, above the enumeration limit {limit}")]
    EnumerationTooLarge { count: u128, limit: u128 },

    #[error("timescale check failed: {0}")]
    Timescale(String),

    #[error("invalid game-show configuration:\n  {}", .0.join("\n  "))]
    InvalidConfig(Vec<String>),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
