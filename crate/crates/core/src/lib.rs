//! Repeated bilateral trade under global budget balance: payoff model, price
//! grids, learners, the two-phase GFT-Max algorithm, adversaries, hindsight
//! benchmarks, and an experiment harness.

pub mod adversaries;
pub mod benchmarks;
pub mod error;
pub mod gftmax;
pub mod grids;
pub mod harness;
pub mod learners;
pub mod trade;

pub use error::{Error, Result};
