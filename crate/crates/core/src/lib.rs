//! Probabilistic, history-dependent motion risk on occupancy grids.
//!
//! The risk of a path is the probability of failing to finish it. Each state
//! contributes a conditional failure probability composed from independent
//! risk elements, and the path risk is one minus the product of the per-state
//! survival probabilities. Because that cost is neither additive nor
//! prefix-optimal, the planners here keep one record per incoming direction
//! (or per longer history) instead of one per vertex.

pub mod cli;
pub mod error;
pub mod oracle;
pub mod planner;
pub mod risk;
pub mod workspace;

pub use error::{Error, Result};
