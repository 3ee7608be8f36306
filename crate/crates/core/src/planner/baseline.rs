use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};
use std::time::Instant;

use super::directional::check_instance;
use super::{PlanResult, PlanStats, Reach, Route};
use crate::error::{Error, Result};
use crate::risk::{DepthClass, HistoryWindow, RiskModel};
use crate::workspace::{Graph, Path, VertexId};

/// Per-element weights of the additive cost; one weight per configured element.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineWeights(Vec<f64>);

impl BaselineWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config("baseline weights must be finite and non-negative".into()));
        }
        Ok(BaselineWeights(weights))
    }

    pub fn uniform(elements: usize) -> Self {
        BaselineWeights(vec![1.0; elements])
    }

    pub fn get(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost {
    cost: f64,
    hops: usize,
}

impl Eq for Cost {}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost.total_cmp(&other.cost).then(self.hops.cmp(&other.hops))
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Conventional shortest path over a per-state additive cost.
///
/// Each element's risk is normalized by its maximum over the free cells and
/// the state cost is the weighted sum of the normalized risks. A path costs
/// the sum over its states, start included. Ties prefer fewer hops, then the
/// smaller predecessor id. Reported risks are the path risks under `model`.
pub fn plan_additive_baseline(
    graph: &Graph,
    start: VertexId,
    model: &RiskModel,
    weights: &BaselineWeights,
) -> Result<PlanResult> {
    let clock = Instant::now();
    check_instance(graph, start, model)?;
    if let Some(e) = model.elements().iter().find(|e| e.depth_class() != DepthClass::Locale) {
        return Err(Error::Config(format!(
            "additive baseline accepts locale elements only, got {}",
            e.kind()
        )));
    }
    let k = model.elements().len();
    if weights.get().len() != k {
        return Err(Error::Config(format!(
            "{} baseline weights for {k} elements",
            weights.get().len()
        )));
    }

    let cells = graph.cell_count();
    let mut raw = vec![vec![0.0; k]; cells];
    let mut max = vec![0.0f64; k];
    for &v in graph.vertices() {
        let state = model.state_risk(&HistoryWindow::new(&[v])?)?;
        for (j, r) in state.element_risks.iter().enumerate() {
            raw[v.0][j] = r.get();
            max[j] = max[j].max(r.get());
        }
    }
    let state_cost = |v: VertexId| -> f64 {
        (0..k)
            .filter(|&j| max[j] > 0.0)
            .map(|j| weights.get()[j] * raw[v.0][j] / max[j])
            .sum()
    };

    let mut best: Vec<Option<Cost>> = vec![None; cells];
    let mut prev: Vec<Option<VertexId>> = vec![None; cells];
    let mut done = vec![false; cells];
    let mut heap = BinaryHeap::new();
    let mut stats = PlanStats {
        lifted_bound: graph.vertex_count() as u128,
        monotone_extraction: true,
        ..PlanStats::default()
    };
    let c0 = Cost {
        cost: state_cost(start),
        hops: 0,
    };
    best[start.0] = Some(c0);
    heap.push(Reverse((c0, start)));
    let mut last: Option<Cost> = None;
    while let Some(Reverse((c, u))) = heap.pop() {
        if done[u.0] || best[u.0] != Some(c) {
            continue;
        }
        done[u.0] = true;
        stats.expansions += 1;
        if last.is_some_and(|l| c < l) {
            stats.monotone_extraction = false;
        }
        last = Some(c);
        for &v in graph.neighbors(u) {
            stats.relaxations += 1;
            let next = Cost {
                cost: c.cost + state_cost(v),
                hops: c.hops + 1,
            };
            if !done[v.0] && best[v.0].is_none_or(|b| next < b) {
                best[v.0] = Some(next);
                prev[v.0] = Some(u);
                heap.push(Reverse((next, v)));
            }
        }
    }

    let mut routes = BTreeMap::new();
    for &v in graph.vertices() {
        let reach = match best[v.0] {
            Some(c) => {
                let mut states = vec![v];
                let mut at = v;
                while let Some(p) = prev[at.0] {
                    states.push(p);
                    at = p;
                }
                states.reverse();
                let path = Path::new(states)?;
                Reach::Reachable(Route {
                    risk: model.path_risk(&path)?,
                    path,
                    additive_cost: Some(c.cost),
                })
            }
            None => Reach::Unreachable,
        };
        routes.insert(v, reach);
    }
    stats.lifted_states = best.iter().filter(|b| b.is_some()).count() as u64;
    stats.wall_time = clock.elapsed().as_secs_f64();
    Ok(PlanResult { start, routes, stats })
}
