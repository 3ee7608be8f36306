use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::time::Instant;

use serde::Serialize;

use super::directional::check_instance;
use super::{
    lifted_bound, precedes, Frontier, HeapEntry, PlanOptions, PlanResult, PlanStats, Reach, Route, Scorer, Survival,
};
use crate::error::{Error, Result};
use crate::risk::RiskModel;
use crate::workspace::{Graph, Path, VertexId};

/// Number of consecutive states the lifted search memorizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct LookbackDepth(u32);

impl LookbackDepth {
    pub const DEFAULT_MAX: u32 = 4;

    pub fn new(n: u32) -> Result<Self> {
        Self::with_max(n, Self::DEFAULT_MAX)
    }

    pub fn with_max(n: u32, max: u32) -> Result<Self> {
        if n == 0 || n > max {
            return Err(Error::Config(format!("look-back depth must be in 1..={max}, got {n}")));
        }
        Ok(LookbackDepth(n))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// Lifted node: a vertex and up to `n - 1` most recent predecessors, newest first.
type Key = (VertexId, Vec<VertexId>);

struct Node {
    key: Key,
    survival: Survival,
    prev: Option<usize>,
    visited: bool,
}

/// Minimum-risk paths from `start` over the graph lifted to histories of the
/// last `n` states.
///
/// Ties are broken by (vertex, history) lexicographically, so `n = 2` gives
/// the same risks and paths as [`super::plan_risk_aware`]. Optimal for every
/// element whose dependency window fits in `n + 1` states; `n = 1` is plain
/// per-vertex search.
pub fn plan_lookback_n(
    graph: &Graph,
    start: VertexId,
    depth: LookbackDepth,
    model: &RiskModel,
    options: &PlanOptions,
) -> Result<PlanResult> {
    let clock = Instant::now();
    check_instance(graph, start, model)?;
    let n = depth.get();
    let bound = lifted_bound(graph.vertex_count(), graph.connectivity().count(), n);
    if bound > options.max_lifted_states {
        return Err(Error::Budget {
            what: format!("lifted states (V * C^{}) at depth {n}", n - 1),
            required: bound,
            budget: options.max_lifted_states,
        });
    }
    let keep = (n - 1) as usize;
    let scorer = Scorer::new(model, options.evaluation);

    let mut nodes = vec![Node {
        key: (start, Vec::new()),
        survival: scorer.start(start)?,
        prev: None,
        visited: false,
    }];
    let mut index: HashMap<Key, usize> = HashMap::from([((start, Vec::new()), 0)]);
    let mut heap = BinaryHeap::from([HeapEntry {
        survival: nodes[0].survival.0,
        key: (start, Vec::new()),
    }]);
    let mut stats = PlanStats {
        lifted_bound: bound,
        monotone_extraction: true,
        ..PlanStats::default()
    };

    let mut last: Option<f64> = None;
    let mut path = Vec::new();
    loop {
        let current = match options.frontier {
            Frontier::LinearScan => {
                let mut best: Option<usize> = None;
                for (i, node) in nodes.iter().enumerate() {
                    if !node.visited
                        && best.is_none_or(|b| precedes((node.survival, &node.key), (nodes[b].survival, &nodes[b].key)))
                    {
                        best = Some(i);
                    }
                }
                best
            }
            Frontier::LazyHeap => loop {
                match heap.pop() {
                    None => break None,
                    Some(e) => {
                        let i = index[&e.key];
                        if nodes[i].visited || nodes[i].survival.0 != e.survival {
                            continue;
                        }
                        break Some(i);
                    }
                }
            },
        };
        let Some(i) = current else { break };
        nodes[i].visited = true;
        stats.expansions += 1;
        let here = nodes[i].survival;
        if last.is_some_and(|l| here.0 > l) {
            stats.monotone_extraction = false;
        }
        last = Some(here.0);

        backtrack(i, &nodes, &mut path);
        let u = nodes[i].key.0;
        let mut history = Vec::with_capacity(keep);
        if keep > 0 {
            history.push(u);
            history.extend(nodes[i].key.1.iter().take(keep - 1));
        }
        for &v in graph.neighbors(u) {
            if path.contains(&v) {
                continue;
            }
            path.push(v);
            let candidate = scorer.extend(here, &path)?;
            path.pop();
            stats.relaxations += 1;
            let key = (v, history.clone());
            let improved = match index.get(&key) {
                Some(&t) if candidate.0 > nodes[t].survival.0 => {
                    nodes[t].survival = candidate;
                    nodes[t].prev = Some(i);
                    true
                }
                Some(_) => false,
                None => {
                    index.insert(key.clone(), nodes.len());
                    nodes.push(Node {
                        key: key.clone(),
                        survival: candidate,
                        prev: Some(i),
                        visited: false,
                    });
                    true
                }
            };
            if improved && options.frontier == Frontier::LazyHeap {
                heap.push(HeapEntry {
                    survival: candidate.0,
                    key,
                });
            }
        }
    }

    let mut best: HashMap<VertexId, usize> = HashMap::new();
    for (i, node) in nodes.iter().enumerate() {
        best.entry(node.key.0)
            .and_modify(|b| {
                if precedes((node.survival, &node.key), (nodes[*b].survival, &nodes[*b].key)) {
                    *b = i;
                }
            })
            .or_insert(i);
    }
    let mut routes = BTreeMap::new();
    for &v in graph.vertices() {
        let reach = match best.get(&v) {
            Some(&i) => {
                backtrack(i, &nodes, &mut path);
                Reach::Reachable(Route {
                    risk: nodes[i].survival.risk(),
                    path: Path::new(path.clone())?,
                    additive_cost: None,
                })
            }
            None => Reach::Unreachable,
        };
        routes.insert(v, reach);
    }
    stats.lifted_states = nodes.len() as u64;
    stats.wall_time = clock.elapsed().as_secs_f64();
    Ok(PlanResult { start, routes, stats })
}

fn backtrack(i: usize, nodes: &[Node], out: &mut Vec<VertexId>) {
    out.clear();
    let mut at = Some(i);
    while let Some(j) = at {
        out.push(nodes[j].key.0);
        at = nodes[j].prev;
    }
    out.reverse();
}
