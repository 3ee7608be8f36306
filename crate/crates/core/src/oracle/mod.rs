//! Ground truth for the planners: exhaustive enumeration of simple paths on
//! small instances and Monte Carlo simulation of path failures.

mod brute;
mod simulate;

pub use brute::{brute_force_min_risk, brute_force_with, BruteForceResult, EnumerationBudget, Pruning};
pub use simulate::{
    batch_failure_band, failure_location_summary, simulate_hazards, simulate_path, simulate_table, FailureSummary,
    RankedState, SimulationReport, GENERATOR, TRIALS_PER_STREAM,
};
