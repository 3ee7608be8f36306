use std::fmt;
use std::path::Path as FsPath;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of a grid cell, `row * width + col`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }

    /// Cell centre in cell units, x to the right and y downwards.
    pub fn center(self) -> (f64, f64) {
        (self.col as f64 + 0.5, self.row as f64 + 0.5)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// Tessellated 2D workspace. Row-major, origin at the top-left cell.
///
/// Every cell is either free or occupied. Free cells may additionally carry
/// a `mud` tag that the traction evaluator reads.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cell_size: f64,
    occupied: Vec<bool>,
    mud: Vec<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonMap {
    width: usize,
    height: usize,
    #[serde(default = "default_cell_size")]
    cell_size: f64,
    #[serde(default)]
    occupied: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    mud: Vec<[usize; 2]>,
}

fn default_cell_size() -> f64 {
    1.0
}

impl GridMap {
    pub fn new(width: usize, height: usize, cell_size: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::format(0, "map must have at least one row and one column"));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::format(0, format!("cell_size must be positive, got {cell_size}")));
        }
        Ok(GridMap {
            width,
            height,
            cell_size,
            occupied: vec![false; width * height],
            mud: vec![false; width * height],
        })
    }

    /// Parses either the ASCII grid format or the JSON map format.
    pub fn parse(source: &str) -> Result<Self> {
        if source.trim_start().starts_with('{') {
            Self::from_json(source)
        } else {
            Self::from_ascii(source)
        }
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// `'.'` free, `'#'` occupied, `'~'` free mud. One row per line.
    pub fn from_ascii(source: &str) -> Result<Self> {
        let mut rows: Vec<&str> = source.split('\n').collect();
        if rows.last() == Some(&"") {
            rows.pop();
        }
        let rows: Vec<&str> = rows.into_iter().map(|r| r.strip_suffix('\r').unwrap_or(r)).collect();
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::format(1, "empty map"));
        }
        let width = rows[0].chars().count();
        let mut map = GridMap::new(width, rows.len(), 1.0)?;
        for (r, line) in rows.iter().enumerate() {
            let n = line.chars().count();
            if n != width {
                return Err(Error::format(
                    r + 1,
                    format!("ragged row: expected {width} cells, found {n}"),
                ));
            }
            for (c, glyph) in line.chars().enumerate() {
                let id = r * width + c;
                match glyph {
                    '.' => {}
                    '#' => map.occupied[id] = true,
                    '~' => map.mud[id] = true,
                    other => {
                        return Err(Error::format(
                            r + 1,
                            format!("unknown glyph {other:?} at column {}", c + 1),
                        ))
                    }
                }
            }
        }
        Ok(map)
    }

    pub fn from_json(source: &str) -> Result<Self> {
        let raw: JsonMap = serde_json::from_str(source).map_err(|e| Error::format(e.line(), e.to_string()))?;
        let mut map = GridMap::new(raw.width, raw.height, raw.cell_size)?;
        for (list, occupied) in [(&raw.occupied, true), (&raw.mud, false)] {
            for &[r, c] in list {
                if r >= raw.height || c >= raw.width {
                    return Err(Error::format(0, format!("cell ({r},{c}) outside the map")));
                }
                let id = r * raw.width + c;
                if occupied {
                    map.occupied[id] = true;
                } else {
                    map.mud[id] = true;
                }
            }
        }
        for id in 0..map.cell_count() {
            if map.occupied[id] && map.mud[id] {
                let cell = map.cell(VertexId(id));
                return Err(Error::format(0, format!("cell {cell} is both occupied and mud")));
            }
        }
        Ok(map)
    }

    pub fn to_json(&self) -> String {
        let collect = |mask: &[bool]| {
            mask.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(i, _)| [i / self.width, i % self.width])
                .collect()
        };
        let raw = JsonMap {
            width: self.width,
            height: self.height,
            cell_size: self.cell_size,
            occupied: collect(&self.occupied),
            mud: collect(&self.mud),
        };
        serde_json::to_string(&raw).expect("map serialization cannot fail")
    }

    pub fn to_ascii(&self) -> String {
        self.render_with(|_| None)
    }

    /// ASCII rendering with `'*'` on the given cells.
    pub fn render_overlay(&self, cells: &[VertexId]) -> String {
        self.render_with(|id| cells.contains(&id).then_some('*'))
    }

    fn render_with(&self, overlay: impl Fn(VertexId) -> Option<char>) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for r in 0..self.height {
            for c in 0..self.width {
                let id = VertexId(r * self.width + c);
                let glyph = overlay(id).unwrap_or(if self.occupied[id.0] {
                    '#'
                } else if self.mud[id.0] {
                    '~'
                } else {
                    '.'
                });
                out.push(glyph);
            }
            out.push('\n');
        }
        out
    }

    /// Random map where each cell is occupied independently with probability `density`.
    pub fn random(width: usize, height: usize, density: f64, seed: u64) -> Result<Self> {
        let mut map = GridMap::new(width, height, 1.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for cell in map.occupied.iter_mut() {
            *cell = rng.random::<f64>() < density;
        }
        Ok(map)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn id(&self, cell: Cell) -> Option<VertexId> {
        (cell.row < self.height && cell.col < self.width).then(|| VertexId(cell.row * self.width + cell.col))
    }

    pub fn cell(&self, id: VertexId) -> Cell {
        Cell::new(id.0 / self.width, id.0 % self.width)
    }

    pub fn contains(&self, id: VertexId) -> bool {
        id.0 < self.cell_count()
    }

    pub fn is_occupied(&self, id: VertexId) -> bool {
        self.occupied[id.0]
    }

    pub fn is_free(&self, id: VertexId) -> bool {
        !self.occupied[id.0]
    }

    pub fn is_mud(&self, id: VertexId) -> bool {
        self.mud[id.0]
    }

    /// Occupancy lookup by signed coordinates; anything outside the map is free.
    pub fn occupied_at(&self, row: i64, col: i64) -> bool {
        if row < 0 || col < 0 || row >= self.height as i64 || col >= self.width as i64 {
            return false;
        }
        self.occupied[row as usize * self.width + col as usize]
    }

    pub fn set_occupied(&mut self, id: VertexId, occupied: bool) {
        self.occupied[id.0] = occupied;
        if occupied {
            self.mud[id.0] = false;
        }
    }

    pub fn set_mud(&mut self, id: VertexId, mud: bool) {
        if !self.occupied[id.0] {
            self.mud[id.0] = mud;
        }
    }

    pub fn free_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| !o).count()
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupied
    }

    pub fn free_cells(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.cell_count()).map(VertexId).filter(|&id| self.is_free(id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_with_one_obstacle() {
        let map = GridMap::parse("..\n.#").unwrap();
        assert_eq!((map.width(), map.height()), (2, 2));
        let occupied: Vec<_> = (0..4).filter(|&i| map.is_occupied(VertexId(i))).collect();
        assert_eq!(occupied, vec![3]);
        assert_eq!(map.cell(VertexId(3)), Cell::new(1, 1));
    }

    #[test]
    fn all_free_ten_by_ten() {
        let text = "..........\n".repeat(10);
        let map = GridMap::parse(&text).unwrap();
        assert_eq!(map.free_count(), 100);
    }

    #[test]
    fn rejects_ragged_rows() {
        let err = GridMap::parse("...\n..\n").unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }), "{err}");
    }

    #[test]
    fn rejects_unknown_glyph_and_trailing_space() {
        assert!(matches!(GridMap::parse("..x\n"), Err(Error::Format { line: 1, .. })));
        assert!(matches!(GridMap::parse(".. \n...\n"), Err(Error::Format { .. })));
    }

    #[test]
    fn rejects_empty() {
        assert!(GridMap::parse("").is_err());
        assert!(GridMap::parse("\n").is_err());
        assert!(GridMap::parse(r#"{"width":0,"height":3,"cell_size":1.0,"occupied":[]}"#).is_err());
    }

    #[test]
    fn json_format() {
        let map = GridMap::parse(r#"{"width":3,"height":2,"cell_size":0.25,"occupied":[[0,1],[1,2]],"mud":[[1,0]]}"#)
            .unwrap();
        assert_eq!(map.cell_size(), 0.25);
        assert_eq!(map.to_ascii(), ".#.\n~.#\n");
        let again = GridMap::parse(&map.to_json()).unwrap();
        assert_eq!(again, map);
    }

    #[test]
    fn json_rejects_out_of_range_and_bad_cell_size() {
        assert!(GridMap::parse(r#"{"width":2,"height":2,"cell_size":1.0,"occupied":[[2,0]]}"#).is_err());
        assert!(GridMap::parse(r#"{"width":2,"height":2,"cell_size":0.0,"occupied":[]}"#).is_err());
    }

    #[test]
    fn overlay_marks_path() {
        let map = GridMap::parse("...\n.#.\n").unwrap();
        let overlay = map.render_overlay(&[VertexId(0), VertexId(1), VertexId(2)]);
        assert_eq!(overlay, "***\n.#.\n");
    }

    #[test]
    fn random_map_is_deterministic() {
        let a = GridMap::random(6, 6, 0.3, 7).unwrap();
        let b = GridMap::random(6, 6, 0.3, 7).unwrap();
        assert_eq!(a, b);
    }
}
