use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::risk::{DepthClass, HistoryWindow, PathCursor, RiskConfig, RiskModel, RiskValue};
use crate::workspace::{Graph, Path, VertexId};

/// Slack on the look-ahead bound so rounding never cuts an optimal branch.
const BOUND_SLACK: f64 = 1e-9;

/// Caps on exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EnumerationBudget {
    pub max_vertices: usize,
    /// Cap on enumerated paths, partial paths included.
    pub max_paths: u64,
}

impl EnumerationBudget {
    pub fn new(max_vertices: usize, max_paths: u64) -> Result<Self> {
        if max_vertices == 0 || max_paths == 0 {
            return Err(Error::Config("enumeration budgets must be positive".into()));
        }
        Ok(EnumerationBudget {
            max_vertices,
            max_paths,
        })
    }
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_vertices: 64,
            max_paths: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceResult {
    pub risk: RiskValue,
    pub path: Path,
    /// Paths visited, partial ones included.
    pub enumerated: u64,
}

/// Whether branches that cannot beat the best complete path are cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pruning {
    /// Cut a prefix once no completion can beat the best complete path:
    /// its survival times an upper bound on the survival of any remaining
    /// route to the goal. Exact, since risk never decreases under extension.
    #[default]
    BranchAndBound,
    /// Visit every simple path.
    None,
}

/// Minimum full-history risk over all simple `start -> goal` paths.
///
/// Depth-first with neighbours in vertex-id order, so among equal minima the
/// lexicographically smallest state sequence wins. `Ok(None)` when `goal`
/// is not reachable.
pub fn brute_force_min_risk(
    graph: &Graph,
    start: VertexId,
    goal: VertexId,
    model: &RiskModel,
    budget: &EnumerationBudget,
) -> Result<Option<BruteForceResult>> {
    brute_force_with(graph, start, goal, model, budget, Pruning::default())
}

pub fn brute_force_with(
    graph: &Graph,
    start: VertexId,
    goal: VertexId,
    model: &RiskModel,
    budget: &EnumerationBudget,
    pruning: Pruning,
) -> Result<Option<BruteForceResult>> {
    graph.check_vertex(start)?;
    graph.check_vertex(goal)?;
    if graph.vertex_count() > budget.max_vertices {
        return Err(Error::Budget {
            what: "vertices for exhaustive enumeration".into(),
            required: graph.vertex_count() as u128,
            budget: budget.max_vertices as u128,
        });
    }
    let (cursor, s0) = model.begin(start)?;
    let cost_to_go = match pruning {
        Pruning::BranchAndBound => cost_to_go(graph, goal, model)?,
        Pruning::None => Vec::new(),
    };
    if pruning == Pruning::BranchAndBound && cost_to_go[start.0].is_infinite() {
        return Ok(None);
    }
    let mut search = Search {
        graph,
        goal,
        model,
        budget,
        pruning,
        cost_to_go,
        on_path: vec![false; graph.cell_count()],
        states: vec![start],
        best: None,
        enumerated: 1,
    };
    search.on_path[start.0] = true;
    search.visit(&cursor, s0.survival)?;
    let enumerated = search.enumerated;
    Ok(search.best.map(|(survival, states)| BruteForceResult {
        risk: RiskValue::from_survival(survival),
        path: Path::new(states).expect("non-empty"),
        enumerated,
    }))
}

struct Search<'a> {
    graph: &'a Graph,
    goal: VertexId,
    model: &'a RiskModel,
    budget: &'a EnumerationBudget,
    pruning: Pruning,
    /// Lower bound on `-ln` of the survival still to come from each vertex.
    cost_to_go: Vec<f64>,
    on_path: Vec<bool>,
    states: Vec<VertexId>,
    best: Option<(f64, Vec<VertexId>)>,
    enumerated: u64,
}

impl Search<'_> {
    fn visit(&mut self, cursor: &PathCursor, survival: f64) -> Result<()> {
        let u = *self.states.last().expect("non-empty");
        if self.pruning == Pruning::BranchAndBound && self.cost_to_go[u.0].is_infinite() {
            return Ok(());
        }
        if let (Pruning::BranchAndBound, Some((b, _))) = (self.pruning, &self.best) {
            let reachable = survival * (-self.cost_to_go[u.0]).exp() * (1.0 + BOUND_SLACK);
            if survival <= *b || reachable <= *b {
                return Ok(());
            }
        }
        if u == self.goal {
            if self.best.as_ref().is_none_or(|(b, _)| survival > *b) {
                self.best = Some((survival, self.states.clone()));
            }
            return Ok(());
        }
        for &v in self.graph.neighbors(u) {
            if self.on_path[v.0] {
                continue;
            }
            self.enumerated += 1;
            if self.enumerated > self.budget.max_paths {
                return Err(Error::Budget {
                    what: "enumerated paths".into(),
                    required: self.enumerated as u128,
                    budget: self.budget.max_paths as u128,
                });
            }
            self.states.push(v);
            self.on_path[v.0] = true;
            let (next, state) = self.model.extend(cursor, &self.states)?;
            self.visit(&next, survival * state.survival)?;
            self.on_path[v.0] = false;
            self.states.pop();
        }
        Ok(())
    }
}

/// Smallest risk any simple path can pick up on entering each vertex, from
/// the locale and action elements alone: those see at most the last three
/// states, and dropping the oldest one only removes a turn.
fn entry_risk_floor(graph: &Graph, model: &RiskModel) -> Result<Vec<f64>> {
    let bounded: Vec<_> = model
        .elements()
        .iter()
        .filter(|e| e.depth_class() != DepthClass::Traverse)
        .cloned()
        .collect();
    let mut floor = vec![0.0; graph.cell_count()];
    if bounded.is_empty() {
        return Ok(floor);
    }
    let sub = RiskModel::new(model.map(), &RiskConfig::new(bounded))?;
    for &v in graph.vertices() {
        let mut lowest = f64::INFINITY;
        for &u in graph.neighbors(v) {
            let r = sub.state_risk(&HistoryWindow::new(&[u, v])?)?.state_risk.get();
            lowest = lowest.min(r);
        }
        floor[v.0] = if lowest.is_finite() { lowest } else { 0.0 };
    }
    Ok(floor)
}

/// Dijkstra from `goal` over entry costs `-ln(1 - floor)`; infinite where
/// the goal cannot be reached.
fn cost_to_go(graph: &Graph, goal: VertexId, model: &RiskModel) -> Result<Vec<f64>> {
    let floor = entry_risk_floor(graph, model)?;
    let mut dist = vec![f64::INFINITY; graph.cell_count()];
    let mut heap = BinaryHeap::new();
    dist[goal.0] = 0.0;
    heap.push(Reverse((Cost(0.0), goal)));
    while let Some(Reverse((Cost(d), w))) = heap.pop() {
        if d > dist[w.0] {
            continue;
        }
        // Finite even for certain failure, so infinity keeps meaning unreachable.
        let enter = (-(-floor[w.0]).ln_1p()).min(1e300);
        for &u in graph.neighbors(w) {
            let nd = d + enter;
            if nd < dist[u.0] {
                dist[u.0] = nd;
                heap.push(Reverse((Cost(nd), u)));
            }
        }
    }
    Ok(dist)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost(f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
