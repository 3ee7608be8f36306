//! Minimum-risk path search.
//!
//! Path risk is not additive and optimal paths do not have optimal prefixes,
//! so the searches here keep one record per arrival history rather than one
//! per vertex: [`plan_risk_aware`] keeps one per incoming edge, and
//! [`plan_lookback_n`] one per sequence of the last `n - 1` predecessors.
//! [`plan_additive_baseline`] is the conventional per-vertex shortest path
//! over a weighted sum of locale risks.

mod baseline;
mod directional;
mod lookback;

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;

pub use baseline::{plan_additive_baseline, BaselineWeights};
pub use directional::plan_risk_aware;
pub use lookback::{plan_lookback_n, LookbackDepth};

use crate::error::Result;
use crate::risk::{HistoryWindow, RiskModel, RiskValue, StateRisk};
use crate::workspace::{Path, VertexId};

/// Default cap on the number of lifted search states.
pub const DEFAULT_MAX_LIFTED_STATES: u128 = 5_000_000;

/// How a candidate path is scored during relaxation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluation {
    /// Re-evaluate the whole candidate path from scratch.
    Literal,
    /// Extend the cached survival of the parent record by the new state,
    /// evaluated on the window the configuration actually reads.
    #[default]
    Incremental,
}

/// Priority structure for extracting the next record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Frontier {
    /// Scan every record for the unvisited minimum.
    LinearScan,
    /// Binary heap with lazy deletion of stale entries.
    #[default]
    LazyHeap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PlanOptions {
    pub evaluation: Evaluation,
    pub frontier: Frontier,
    pub max_lifted_states: u128,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            evaluation: Evaluation::default(),
            frontier: Frontier::default(),
            max_lifted_states: DEFAULT_MAX_LIFTED_STATES,
        }
    }
}

impl PlanOptions {
    pub fn literal() -> Self {
        PlanOptions {
            evaluation: Evaluation::Literal,
            frontier: Frontier::LinearScan,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Route {
    pub risk: RiskValue,
    pub path: Path,
    /// Weighted-sum cost, reported by the additive baseline only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub additive_cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Reach {
    Reachable(Route),
    Unreachable,
}

impl Reach {
    pub fn route(&self) -> Option<&Route> {
        match self {
            Reach::Reachable(r) => Some(r),
            Reach::Unreachable => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PlanStats {
    /// Records extracted from the frontier.
    pub expansions: u64,
    /// Candidate paths evaluated.
    pub relaxations: u64,
    /// Records that received a finite risk.
    pub lifted_states: u64,
    /// Size of the lifted state space the search may touch, `V * C^(n-1)`.
    pub lifted_bound: u128,
    /// Extraction risks never decreased during the run.
    pub monotone_extraction: bool,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanResult {
    pub start: VertexId,
    pub routes: BTreeMap<VertexId, Reach>,
    pub stats: PlanStats,
}

impl PlanResult {
    pub fn get(&self, v: VertexId) -> Option<&Reach> {
        self.routes.get(&v)
    }

    pub fn route(&self, v: VertexId) -> Option<&Route> {
        self.get(v).and_then(Reach::route)
    }

    pub fn risk(&self, v: VertexId) -> Option<RiskValue> {
        self.route(v).map(|r| r.risk)
    }
}

/// Risk of a record, ordered by survival so that no two distinct survivals
/// compare equal after rounding `1 - s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Survival(pub f64);

impl Survival {
    pub(crate) fn risk(self) -> RiskValue {
        RiskValue::from_survival(self.0)
    }
}

/// Frontier order: higher survival first, then smaller key.
pub(crate) fn precedes<K: Ord>(a: (Survival, &K), b: (Survival, &K)) -> bool {
    match a.0 .0.total_cmp(&b.0 .0) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a.1 < b.1,
    }
}

/// Max-heap entry whose maximum is the record extracted next.
#[derive(Debug, Clone)]
pub(crate) struct HeapEntry<K> {
    pub survival: f64,
    pub key: K,
}

impl<K: Ord> PartialEq for HeapEntry<K> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<K: Ord> Eq for HeapEntry<K> {}

impl<K: Ord> PartialOrd for HeapEntry<K> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<K: Ord> Ord for HeapEntry<K> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.survival
            .total_cmp(&other.survival)
            .then_with(|| other.key.cmp(&self.key))
    }
}

/// Scores candidate paths for the searches.
pub(crate) struct Scorer<'a> {
    model: &'a RiskModel,
    evaluation: Evaluation,
    depth: Option<usize>,
}

impl<'a> Scorer<'a> {
    pub(crate) fn new(model: &'a RiskModel, evaluation: Evaluation) -> Self {
        Scorer {
            model,
            evaluation,
            depth: model.history_depth(),
        }
    }

    pub(crate) fn start(&self, start: VertexId) -> Result<Survival> {
        Ok(Survival(self.model.path_survival(&[start])?))
    }

    /// Survival of `candidate`, whose prefix without the last state has
    /// survival `parent`.
    pub(crate) fn extend(&self, parent: Survival, candidate: &[VertexId]) -> Result<Survival> {
        match self.evaluation {
            Evaluation::Literal => Ok(Survival(self.model.path_survival(candidate)?)),
            Evaluation::Incremental => {
                let from = self.depth.map_or(0, |h| candidate.len().saturating_sub(h));
                let state = self.model.state_risk(&HistoryWindow::new(&candidate[from..])?)?;
                Ok(Survival(parent.0 * state.survival))
            }
        }
    }
}

/// Per-state risks of a reported path, for tables and JSON output.
pub fn explain(model: &RiskModel, path: &Path) -> Result<Vec<StateRisk>> {
    model.per_state(path.states())
}

/// Incoming-edge count per vertex, `C`, used for the lifted-state bound.
pub(crate) fn lifted_bound(vertices: usize, connectivity: usize, n: u32) -> u128 {
    (vertices as u128).saturating_mul((connectivity as u128).saturating_pow(n.saturating_sub(1)))
}
