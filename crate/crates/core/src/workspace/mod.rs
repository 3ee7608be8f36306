//! Tessellated workspace: occupancy grids, the search graph over free cells,
//! and feasible paths.

mod graph;
mod map;

pub use graph::{Connectivity, Graph, Path};
pub use map::{Cell, GridMap, VertexId};
