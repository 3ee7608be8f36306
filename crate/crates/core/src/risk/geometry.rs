//! Planar geometry in cell units: `x` grows with the column, `y` with the
//! row, and occupied cell `(r, c)` covers the square `[c, c+1] x [r, r+1]`.

use crate::workspace::{GridMap, VertexId};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn center_of(map: &GridMap, v: VertexId) -> Self {
        let (x, y) = map.cell(v).center();
        Point { x, y }
    }

    pub fn minus(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        self.minus(o).norm()
    }

    pub fn approx_eq(self, o: Point) -> bool {
        (self.x - o.x).abs() < EPS && (self.y - o.y).abs() < EPS
    }
}

/// Does the segment `a-b` pass through the open interior of the unit square
/// with top-left corner `(col, row)`? Touching an edge or corner does not count.
pub(crate) fn crosses_square(a: Point, b: Point, col: f64, row: f64) -> bool {
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    for (start, delta, lo) in [(a.x, b.x - a.x, col), (a.y, b.y - a.y, row)] {
        let hi = lo + 1.0;
        if delta.abs() < EPS {
            if start <= lo + EPS || start >= hi - EPS {
                return false;
            }
        } else {
            let ta = (lo - start) / delta;
            let tb = (hi - start) / delta;
            t0 = t0.max(ta.min(tb));
            t1 = t1.min(ta.max(tb));
        }
    }
    t1 - t0 > EPS
}

/// True when the segment crosses the interior of some occupied cell.
pub fn segment_blocked(map: &GridMap, a: Point, b: Point) -> bool {
    let c0 = a.x.min(b.x).floor() as i64;
    let c1 = a.x.max(b.x).ceil() as i64;
    let r0 = a.y.min(b.y).floor() as i64;
    let r1 = a.y.max(b.y).ceil() as i64;
    for r in r0..r1.max(r0 + 1) {
        for c in c0..c1.max(c0 + 1) {
            if map.occupied_at(r, c) && crosses_square(a, b, c as f64, r as f64) {
                return true;
            }
        }
    }
    false
}

/// Unobstructed line of sight between two cell centres. An occupied target
/// is never visible.
pub fn line_of_sight(map: &GridMap, from: VertexId, to: VertexId) -> bool {
    map.is_free(to) && !segment_blocked(map, Point::center_of(map, from), Point::center_of(map, to))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_crossing() {
        let a = Point::new(0.5, 0.5);
        assert!(crosses_square(a, Point::new(2.5, 0.5), 1.0, 0.0));
        assert!(!crosses_square(a, Point::new(2.5, 0.5), 1.0, 1.0));
        // Exactly through the shared corner (1, 1).
        assert!(!crosses_square(a, Point::new(1.5, 1.5), 1.0, 0.0));
        assert!(!crosses_square(a, Point::new(1.5, 1.5), 0.0, 1.0));
        // Along an edge.
        assert!(!crosses_square(Point::new(0.0, 1.0), Point::new(3.0, 1.0), 1.0, 0.0));
    }

    #[test]
    fn blocked_by_wall() {
        let map = GridMap::parse("...\n.#.\n...\n").unwrap();
        let left = Point::new(0.5, 1.5);
        let right = Point::new(2.5, 1.5);
        assert!(segment_blocked(&map, left, right));
        assert!(!segment_blocked(&map, Point::new(0.5, 0.5), Point::new(2.5, 0.5)));
        // Diagonal grazing the obstacle corner at (1, 1).
        assert!(!segment_blocked(&map, Point::new(0.5, 0.5), Point::new(1.0, 1.0)));
        assert!(!line_of_sight(&map, VertexId(3), VertexId(5)));
        assert!(line_of_sight(&map, VertexId(0), VertexId(2)));
    }
}
