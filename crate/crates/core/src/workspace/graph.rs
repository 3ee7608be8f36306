use std::fmt;

use serde::{Deserialize, Serialize};

use super::map::{GridMap, VertexId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub fn from_count(count: u32) -> Result<Self> {
        match count {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(Error::Config(format!("connectivity must be 4 or 8, got {other}"))),
        }
    }

    /// The `C` of the grid: maximum number of incoming edges per vertex.
    pub fn count(self) -> usize {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }

    /// Maximum Euclidean distance between consecutive states, in cells.
    pub fn feasibility_radius(self) -> f64 {
        match self {
            Connectivity::Four => 1.0,
            Connectivity::Eight => std::f64::consts::SQRT_2,
        }
    }

    fn offsets(self) -> &'static [(i64, i64)] {
        const FOUR: [(i64, i64); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];
        const EIGHT: [(i64, i64); 8] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.count())
    }
}

/// Search graph over the free cells of a [`GridMap`].
///
/// Adjacency is stored in compressed rows indexed by cell id, so every
/// directed edge `(from -> to)` has a stable slot number. Neighbour lists are
/// sorted by vertex id. Diagonal edges need both orthogonal cells free.
#[derive(Debug, Clone)]
pub struct Graph {
    width: usize,
    connectivity: Connectivity,
    free: Vec<bool>,
    vertices: Vec<VertexId>,
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
}

impl Graph {
    pub fn build(map: &GridMap, connectivity: Connectivity) -> Self {
        let (w, h) = (map.width() as i64, map.height() as i64);
        let mut offsets = Vec::with_capacity(map.cell_count() + 1);
        let mut targets = Vec::new();
        let mut vertices = Vec::new();
        let free_at = |r: i64, c: i64| r >= 0 && c >= 0 && r < h && c < w && !map.occupied_at(r, c);

        offsets.push(0);
        for r in 0..h {
            for c in 0..w {
                if free_at(r, c) {
                    vertices.push(VertexId((r * w + c) as usize));
                    for &(dr, dc) in connectivity.offsets() {
                        let (nr, nc) = (r + dr, c + dc);
                        if !free_at(nr, nc) {
                            continue;
                        }
                        if dr != 0 && dc != 0 && !(free_at(r + dr, c) && free_at(r, c + dc)) {
                            continue;
                        }
                        targets.push(VertexId((nr * w + nc) as usize));
                    }
                }
                offsets.push(targets.len());
            }
        }

        Graph {
            width: map.width(),
            connectivity,
            free: map.occupancy().iter().map(|o| !o).collect(),
            vertices,
            offsets,
            targets,
        }
    }

    pub fn connectivity(&self) -> Connectivity {
        self.connectivity
    }

    pub fn feasibility_radius(&self) -> f64 {
        self.connectivity.feasibility_radius()
    }

    /// Free cells in ascending id order.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Number of directed edge slots (each undirected edge counted twice).
    pub fn slot_count(&self) -> usize {
        self.targets.len()
    }

    /// Number of cells of the underlying map, free or not.
    pub fn cell_count(&self) -> usize {
        self.free.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_vertex(&self, v: VertexId) -> bool {
        self.free.get(v.0).copied().unwrap_or(false)
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if self.is_vertex(v) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v))
        }
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.targets[self.offsets[v.0]..self.offsets[v.0 + 1]]
    }

    /// Global slot range of the neighbours of `v`.
    pub fn slots(&self, v: VertexId) -> std::ops::Range<usize> {
        self.offsets[v.0]..self.offsets[v.0 + 1]
    }

    /// Target vertex of a directed slot.
    pub fn slot_target(&self, slot: usize) -> VertexId {
        self.targets[slot]
    }

    /// Owner vertex of a directed slot.
    pub fn slot_owner(&self, slot: usize) -> VertexId {
        // offsets is non-decreasing; find the row containing `slot`.
        let row = self.offsets.partition_point(|&o| o <= slot) - 1;
        VertexId(row)
    }

    /// Slot at `v` whose target is `u`, i.e. the record of edge `u - v` kept at `v`.
    pub fn slot_between(&self, v: VertexId, u: VertexId) -> Option<usize> {
        let range = self.slots(v);
        self.targets[range.clone()]
            .binary_search(&u)
            .ok()
            .map(|i| range.start + i)
    }

    pub fn is_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.is_vertex(u) && self.is_vertex(v) && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Undirected edge list, each pair `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        self.vertices
            .iter()
            .flat_map(|&u| self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect()
    }

    /// True iff every consecutive pair of states is an edge.
    pub fn is_feasible(&self, path: &Path) -> Result<bool> {
        for &s in path.states() {
            self.check_vertex(s)?;
        }
        Ok(path.states().windows(2).all(|w| self.is_edge(w[0], w[1])))
    }

    pub fn check_feasible(&self, path: &Path) -> Result<()> {
        for &s in path.states() {
            self.check_vertex(s)?;
        }
        match path.states().windows(2).position(|w| !self.is_edge(w[0], w[1])) {
            Some(index) => Err(Error::Infeasible { index }),
            None => Ok(()),
        }
    }
}

/// Ordered state sequence `s_0 .. s_n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path(Vec<VertexId>);

impl Path {
    pub fn new(states: Vec<VertexId>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Precondition("a path needs at least one state".into()));
        }
        Ok(Path(states))
    }

    pub fn singleton(v: VertexId) -> Self {
        Path(vec![v])
    }

    pub fn states(&self) -> &[VertexId] {
        &self.0
    }

    pub fn into_states(self) -> Vec<VertexId> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn start(&self) -> VertexId {
        self.0[0]
    }

    pub fn end(&self) -> VertexId {
        *self.0.last().expect("paths are non-empty")
    }

    /// No repeated vertex.
    pub fn is_simple(&self) -> bool {
        let mut seen = self.0.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    pub fn prefix(&self, len: usize) -> Path {
        Path(self.0[..len].to_vec())
    }
}

impl std::ops::Deref for Path {
    type Target = [VertexId];

    fn deref(&self) -> &[VertexId] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(text: &str, c: Connectivity) -> Graph {
        Graph::build(&GridMap::parse(text).unwrap(), c)
    }

    #[test]
    fn lattice_counts() {
        let g4 = graph("...\n...\n...\n", Connectivity::Four);
        assert_eq!((g4.vertex_count(), g4.edge_count()), (9, 12));
        let g8 = graph("...\n...\n...\n", Connectivity::Eight);
        assert_eq!((g8.vertex_count(), g8.edge_count()), (9, 20));
    }

    #[test]
    fn occupied_corner() {
        let g = graph("..\n.#\n", Connectivity::Four);
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 2));
    }

    #[test]
    fn no_corner_cutting() {
        let g = graph(".#\n..\n", Connectivity::Eight);
        // (0,0) - (1,1) would squeeze past the occupied (0,1).
        assert!(!g.is_edge(VertexId(0), VertexId(3)));
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn connectivity_must_be_four_or_eight() {
        assert!(Connectivity::from_count(6).is_err());
        assert_eq!(Connectivity::from_count(8).unwrap(), Connectivity::Eight);
    }

    #[test]
    fn feasibility() {
        let g = graph("...\n...\n", Connectivity::Four);
        assert!(g.is_feasible(&Path::singleton(VertexId(4))).unwrap());
        let diagonal = Path::new(vec![VertexId(0), VertexId(4)]).unwrap();
        assert!(!g.is_feasible(&diagonal).unwrap());
        let ok = Path::new(vec![VertexId(0), VertexId(1), VertexId(4)]).unwrap();
        assert!(g.is_feasible(&ok).unwrap());
        let unknown = Path::new(vec![VertexId(0), VertexId(17)]).unwrap();
        assert!(matches!(g.is_feasible(&unknown), Err(Error::UnknownVertex(_))));
        assert!(matches!(
            g.check_feasible(&diagonal),
            Err(Error::Infeasible { index: 0 })
        ));
    }

    #[test]
    fn slots_round_trip() {
        let g = graph("...\n.#.\n...\n", Connectivity::Eight);
        for &v in g.vertices() {
            for slot in g.slots(v) {
                assert_eq!(g.slot_owner(slot), v);
                let u = g.slot_target(slot);
                assert_eq!(g.slot_between(v, u), Some(slot));
            }
            assert!(g.neighbors(v).windows(2).all(|w| w[0] < w[1]));
            assert!(g.neighbors(v).len() <= 8);
        }
    }
}
