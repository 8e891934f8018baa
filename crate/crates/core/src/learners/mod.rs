//! Regret minimizers used by the two-phase algorithm.

pub mod block;
pub mod estimator;
pub mod exp3p;
pub mod hedge;

pub use block::{BlockLearner, BlockStep};
pub use estimator::{expected_estimate, gft_est, propose, EstimatorBranch, GftEstimate, GftProbe};
pub use exp3p::{Exp3P, Exp3PParams};
pub use hedge::Hedge;
