#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::path::PathBuf;

use riskplan::risk::{HistoryWindow, RiskConfig, RiskElementSpec, RiskModel};
use riskplan::workspace::{Connectivity, Graph, GridMap, VertexId};

pub fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

pub struct Instance {
    pub map: GridMap,
    pub graph: Graph,
    pub model: RiskModel,
    pub start: VertexId,
}

/// Locale elements with parameters drawn from `seed`.
pub fn locale_config(seed: u64) -> RiskConfig {
    let f = |k: u64| {
        ((seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(k * 1442695040888963407))
            >> 33) as f64
            / (1u64 << 31) as f64
    };
    RiskConfig::new(vec![
        RiskElementSpec::distance(1.5 + 3.0 * f(1), 0.02 + 0.1 * f(2)).unwrap(),
        RiskElementSpec::visibility(1.0 + 2.5 * f(3), 0.02 + 0.1 * f(4)).unwrap(),
    ])
}

/// Locale and action elements with parameters drawn from `seed`.
pub fn locale_action_config(seed: u64) -> RiskConfig {
    let f = |k: u64| {
        ((seed.wrapping_mul(2862933555777941757).wrapping_add(k * 3037000493)) >> 33) as f64 / (1u64 << 31) as f64
    };
    let mut elements = locale_config(seed).into_elements();
    elements.push(RiskElementSpec::action_length(0.01 + 0.05 * f(5)).unwrap());
    elements.push(RiskElementSpec::turn(0.02 + 0.2 * f(6)).unwrap());
    RiskConfig::new(elements)
}

/// Random map with its first free cell as start, or `None` if fully occupied.
pub fn random_instance(
    width: usize,
    height: usize,
    density: f64,
    seed: u64,
    connectivity: Connectivity,
    config: &RiskConfig,
) -> Option<Instance> {
    let map = GridMap::random(width, height, density, seed).unwrap();
    let graph = Graph::build(&map, connectivity);
    let start = *graph.vertices().first()?;
    let model = RiskModel::new(&map, config).unwrap();
    Some(Instance {
        map,
        graph,
        model,
        start,
    })
}

/// Dijkstra over vertex weights `-ln(1 - state risk)`, start included,
/// mapped back through `1 - exp(-cost)`. Valid for locale-only configurations.
pub fn log_dijkstra(graph: &Graph, model: &RiskModel, start: VertexId) -> Vec<Option<f64>> {
    let n = graph.cell_count();
    let weight: Vec<f64> = (0..n)
        .map(|i| {
            let v = VertexId(i);
            if !graph.is_vertex(v) {
                return f64::INFINITY;
            }
            let s = model.state_risk(&HistoryWindow::new(&[v]).unwrap()).unwrap();
            -(1.0 - s.state_risk.get()).ln()
        })
        .collect();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[start.0] = weight[start.0];
    heap.push(Reverse((OrdF64(dist[start.0]), start.0)));
    while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &v in graph.neighbors(VertexId(u)) {
            let nd = d + weight[v.0];
            if nd < dist[v.0] {
                dist[v.0] = nd;
                heap.push(Reverse((OrdF64(nd), v.0)));
            }
        }
    }
    dist.into_iter()
        .map(|d| d.is_finite().then(|| -(-d).exp_m1()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrdF64(pub f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Free cells reachable from the first free cell, by flood fill over
/// 4-neighbours on the raw occupancy.
pub fn flood_fill_count(map: &GridMap) -> usize {
    let (w, h) = (map.width(), map.height());
    let Some(first) = map.free_cells().next() else {
        return 0;
    };
    let mut seen = vec![false; w * h];
    let mut stack = vec![first.0];
    seen[first.0] = true;
    let mut count = 0;
    while let Some(i) = stack.pop() {
        count += 1;
        let (r, c) = (i / w, i % w);
        let mut push = |j: usize| {
            if !seen[j] && map.is_free(VertexId(j)) {
                seen[j] = true;
                stack.push(j);
            }
        };
        if r > 0 {
            push(i - w);
        }
        if r + 1 < h {
            push(i + w);
        }
        if c > 0 {
            push(i - 1);
        }
        if c + 1 < w {
            push(i + 1);
        }
    }
    count
}
