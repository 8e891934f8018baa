use std::path::PathBuf;

use thiserror::Error;

use crate::trade::PricePair;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("value {value} for {what} is outside [0, 1]")]
    OutOfUnitRange { what: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty valuation sequence")]
    EmptySequence,

    #[error("reward {reward} outside declared range [{lo}, {hi}]")]
    RewardOutOfRange { reward: f64, lo: f64, hi: f64 },

    #[error("reward vector has length {got}, expected {expected}")]
    RewardLength { got: usize, expected: usize },

    #[error("action index {index} out of range for {n} actions")]
    InvalidAction { index: usize, n: usize },

    #[error(
        "infeasible post at round {round}: p - q = {deficit} exceeds budget {budget} ({pair:?})"
    )]
    InfeasiblePost {
        round: usize,
        pair: PricePair,
        deficit: f64,
        budget: f64,
    },

    #[error("length mismatch: sequence has {seq} rounds, trace has {trace}")]
    LengthMismatch { seq: usize, trace: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
