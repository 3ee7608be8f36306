use std::collections::{BTreeMap, BinaryHeap};
use std::time::Instant;

use super::{
    lifted_bound, precedes, Frontier, HeapEntry, PlanOptions, PlanResult, PlanStats, Reach, Route, Scorer, Survival,
};
use crate::error::{Error, Result};
use crate::risk::RiskModel;
use crate::workspace::{Graph, Path, VertexId};

/// Minimum-risk paths from `start` to every vertex, with one record per
/// (vertex, incoming edge).
///
/// A record's id is the adjacency slot of its vertex pointing back at the
/// predecessor, so ordering records by id orders them by (vertex,
/// predecessor). The start vertex owns one record per incoming edge, all
/// holding the single-state path. Candidates that would revisit a vertex are
/// skipped. Optimal whenever no element reads further back than two moves.
pub fn plan_risk_aware(graph: &Graph, start: VertexId, model: &RiskModel, options: &PlanOptions) -> Result<PlanResult> {
    let clock = Instant::now();
    check_instance(graph, start, model)?;
    let bound = lifted_bound(graph.vertex_count(), graph.connectivity().count(), 2);
    if bound > options.max_lifted_states {
        return Err(Error::Budget {
            what: "directional components (V * C)".into(),
            required: bound,
            budget: options.max_lifted_states,
        });
    }
    let scorer = Scorer::new(model, options.evaluation);

    let slots = graph.slot_count();
    let owner: Vec<VertexId> = (0..slots).map(|s| graph.slot_owner(s)).collect();
    let mut survival: Vec<Option<Survival>> = vec![None; slots];
    let mut prev: Vec<Option<usize>> = vec![None; slots];
    let mut visited = vec![false; slots];
    let mut heap = BinaryHeap::new();
    let mut stats = PlanStats {
        lifted_bound: bound,
        monotone_extraction: true,
        ..PlanStats::default()
    };

    let s0 = scorer.start(start)?;
    for slot in graph.slots(start) {
        survival[slot] = Some(s0);
        heap.push(HeapEntry {
            survival: s0.0,
            key: slot,
        });
    }

    let mut last: Option<f64> = None;
    let mut path = Vec::new();
    loop {
        let current = match options.frontier {
            Frontier::LinearScan => {
                let mut best: Option<(Survival, usize)> = None;
                for slot in 0..slots {
                    if let (Some(s), false) = (survival[slot], visited[slot]) {
                        if best.is_none_or(|(bs, b)| precedes((s, &slot), (bs, &b))) {
                            best = Some((s, slot));
                        }
                    }
                }
                best.map(|(_, slot)| slot)
            }
            Frontier::LazyHeap => loop {
                match heap.pop() {
                    None => break None,
                    Some(e) if visited[e.key] || survival[e.key].map(|s| s.0) != Some(e.survival) => continue,
                    Some(e) => break Some(e.key),
                }
            },
        };
        let Some(slot) = current else { break };
        visited[slot] = true;
        stats.expansions += 1;
        let here = survival[slot].expect("extracted record has a risk");
        if last.is_some_and(|l| here.0 > l) {
            stats.monotone_extraction = false;
        }
        last = Some(here.0);

        backtrack(slot, &owner, &prev, &mut path);
        let u = owner[slot];
        for &v in graph.neighbors(u) {
            if path.contains(&v) {
                continue;
            }
            path.push(v);
            let candidate = scorer.extend(here, &path)?;
            path.pop();
            stats.relaxations += 1;
            let target = graph.slot_between(v, u).expect("undirected adjacency");
            if survival[target].is_none_or(|s| candidate.0 > s.0) {
                survival[target] = Some(candidate);
                prev[target] = Some(slot);
                if options.frontier == Frontier::LazyHeap {
                    heap.push(HeapEntry {
                        survival: candidate.0,
                        key: target,
                    });
                }
            }
        }
    }

    let mut routes = BTreeMap::new();
    for &v in graph.vertices() {
        let mut best: Option<(Survival, usize)> = None;
        for slot in graph.slots(v) {
            if let Some(s) = survival[slot] {
                if best.is_none_or(|(bs, b)| precedes((s, &slot), (bs, &b))) {
                    best = Some((s, slot));
                }
            }
        }
        let reach = match best {
            Some((s, slot)) => {
                backtrack(slot, &owner, &prev, &mut path);
                Reach::Reachable(Route {
                    risk: s.risk(),
                    path: Path::new(path.clone())?,
                    additive_cost: None,
                })
            }
            None if v == start => Reach::Reachable(Route {
                risk: s0.risk(),
                path: Path::singleton(start),
                additive_cost: None,
            }),
            None => Reach::Unreachable,
        };
        routes.insert(v, reach);
    }
    stats.lifted_states = survival.iter().filter(|s| s.is_some()).count() as u64;
    stats.wall_time = clock.elapsed().as_secs_f64();
    Ok(PlanResult { start, routes, stats })
}

/// Writes the path held by record `slot` into `out`, start first.
fn backtrack(slot: usize, owner: &[VertexId], prev: &[Option<usize>], out: &mut Vec<VertexId>) {
    out.clear();
    let mut at = Some(slot);
    while let Some(s) = at {
        out.push(owner[s]);
        at = prev[s];
    }
    out.reverse();
}

pub(super) fn check_instance(graph: &Graph, start: VertexId, model: &RiskModel) -> Result<()> {
    if graph.cell_count() != model.map().cell_count() || graph.width() != model.map().width() {
        return Err(Error::Precondition(
            "graph and risk model were built from different maps".into(),
        ));
    }
    graph.check_vertex(start)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::{RiskConfig, RiskElementSpec};
    use crate::workspace::{Cell, Connectivity, GridMap};

    fn model(map: &GridMap, elements: Vec<RiskElementSpec>) -> RiskModel {
        RiskModel::new(map, &RiskConfig::new(elements)).unwrap()
    }

    #[test]
    fn single_vertex() {
        let map = GridMap::parse(".\n").unwrap();
        let graph = Graph::build(&map, Connectivity::Four);
        let m = model(&map, vec![RiskElementSpec::turn(0.1).unwrap()]);
        let plan = plan_risk_aware(&graph, VertexId(0), &m, &PlanOptions::default()).unwrap();
        assert_eq!(plan.routes.len(), 1);
        let route = plan.route(VertexId(0)).unwrap();
        assert_eq!(route.risk.get(), 0.0);
        assert_eq!(route.path, Path::singleton(VertexId(0)));
    }

    #[test]
    fn unreachable_is_not_certain_failure() {
        let map = GridMap::parse(".#.\n").unwrap();
        let graph = Graph::build(&map, Connectivity::Four);
        let m = model(&map, vec![RiskElementSpec::action_length(0.1).unwrap()]);
        let plan = plan_risk_aware(&graph, VertexId(0), &m, &PlanOptions::default()).unwrap();
        assert_eq!(plan.get(VertexId(2)), Some(&Reach::Unreachable));
        assert!(plan.get(VertexId(1)).is_none());
    }

    #[test]
    fn prefers_fewer_turns() {
        // 3x3 open grid, corner to corner: every shortest path has length 4;
        // only the two L-shaped ones make a single turn.
        let map = GridMap::parse("...\n...\n...\n").unwrap();
        let graph = Graph::build(&map, Connectivity::Four);
        let m = model(
            &map,
            vec![
                RiskElementSpec::action_length(0.01).unwrap(),
                RiskElementSpec::turn(0.2).unwrap(),
            ],
        );
        let plan = plan_risk_aware(&graph, VertexId(0), &m, &PlanOptions::default()).unwrap();
        let route = plan.route(map.id(Cell::new(2, 2)).unwrap()).unwrap();
        assert_eq!(
            route.path.states(),
            &[VertexId(0), VertexId(1), VertexId(2), VertexId(5), VertexId(8)]
        );
        let expected = 1.0 - 0.99f64.powi(4) * 0.9;
        assert!((route.risk.get() - expected).abs() < 1e-12);
        assert!(plan.stats.monotone_extraction);
    }

    #[test]
    fn rejects_bad_start_and_budget() {
        let map = GridMap::parse("..\n.#\n").unwrap();
        let graph = Graph::build(&map, Connectivity::Four);
        let m = model(&map, vec![RiskElementSpec::turn(0.1).unwrap()]);
        assert!(matches!(
            plan_risk_aware(&graph, VertexId(3), &m, &PlanOptions::default()),
            Err(Error::UnknownVertex(_))
        ));
        let tight = PlanOptions {
            max_lifted_states: 2,
            ..PlanOptions::default()
        };
        assert!(matches!(
            plan_risk_aware(&graph, VertexId(0), &m, &tight),
            Err(Error::Budget { .. })
        ));
    }
}
