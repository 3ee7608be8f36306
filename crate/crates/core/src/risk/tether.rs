//! Taut tether model: a polyline from the anchor (first state) to the robot
//! that bends around obstacle corners.
//!
//! After every move the contact stack is updated in two phases. Unwrap pops
//! the top contact while the robot sits on or behind the line through that
//! contact and the pivot below it. Wrap sweeps the last free segment from
//! its old to its new robot end and inserts the first obstacle corner the
//! sweep runs into, repeating from that corner until the segment to the
//! robot is clear.

use serde::Serialize;

use super::geometry::{crosses_square, segment_blocked, Point};
use crate::error::{Error, Result};
use crate::workspace::{GridMap, VertexId};

const EPS: f64 = 1e-9;
/// Rotation used to probe which side of a corner an obstacle lies on.
const PROBE_ANGLE: f64 = 1e-6;
const MAX_WRAPS_PER_MOVE: usize = 256;

/// Convex lattice corners of occupied space: one occupied cell among the
/// four around the point, or two placed diagonally.
#[derive(Debug, Clone)]
pub struct TetherGeometry {
    corners: Vec<(i64, i64)>,
}

impl TetherGeometry {
    pub fn new(map: &GridMap) -> Self {
        let (w, h) = (map.width() as i64, map.height() as i64);
        let mut corners = Vec::new();
        for y in 0..=h {
            for x in 0..=w {
                let around = [(y - 1, x - 1), (y - 1, x), (y, x - 1), (y, x)];
                let occ = around.map(|(r, c)| map.occupied_at(r, c));
                let count = occ.iter().filter(|&&o| o).count();
                if count == 1 || (count == 2 && occ[0] == occ[3]) {
                    corners.push((x, y));
                }
            }
        }
        TetherGeometry { corners }
    }

    pub fn corners(&self) -> &[(i64, i64)] {
        &self.corners
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contact {
    /// Corner position `(x, y)` in cell units.
    pub corner: (i64, i64),
    /// Side the tether wraps on: +1 or -1 (sign of the sweep's cross product).
    pub orientation: i8,
}

impl Contact {
    fn point(&self) -> Point {
        Point::new(self.corner.0 as f64, self.corner.1 as f64)
    }
}

/// Immutable snapshot of the tether after reaching `robot`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TetherState {
    anchor: VertexId,
    robot: VertexId,
    contacts: Vec<Contact>,
    taut_length: f64,
}

impl TetherState {
    pub fn new(anchor: VertexId, map: &GridMap) -> Result<Self> {
        if !map.contains(anchor) || map.is_occupied(anchor) {
            return Err(Error::Precondition(format!(
                "tether anchor {anchor} is not a free cell"
            )));
        }
        Ok(TetherState {
            anchor,
            robot: anchor,
            contacts: Vec::new(),
            taut_length: 0.0,
        })
    }

    pub fn anchor(&self) -> VertexId {
        self.anchor
    }

    pub fn robot(&self) -> VertexId {
        self.robot
    }

    pub fn contacts(&self) -> &[Contact] {
        &self.contacts
    }

    pub fn contact_count(&self) -> usize {
        self.contacts.len()
    }

    /// Length of the taut polyline in metres.
    pub fn taut_length(&self) -> f64 {
        self.taut_length
    }

    /// Polyline vertices from anchor to robot, in cell units.
    pub fn polyline(&self, map: &GridMap) -> Vec<Point> {
        let mut pts = vec![Point::center_of(map, self.anchor)];
        pts.extend(self.contacts.iter().map(Contact::point));
        pts.push(Point::center_of(map, self.robot));
        pts
    }

    /// Tether after the robot moves to the adjacent free cell `to`.
    pub fn advance(&self, to: VertexId, map: &GridMap, geometry: &TetherGeometry) -> Result<Self> {
        if !map.contains(to) || map.is_occupied(to) {
            return Err(Error::Precondition(format!(
                "tether cannot move into occupied cell {to}"
            )));
        }
        let (a, b) = (map.cell(self.robot), map.cell(to));
        if a.row.abs_diff(b.row) > 1 || a.col.abs_diff(b.col) > 1 {
            return Err(Error::Precondition(format!(
                "tether move {a} -> {b} is not between adjacent cells"
            )));
        }
        let anchor = Point::center_of(map, self.anchor);
        let prev = Point::center_of(map, self.robot);
        let next = Point::center_of(map, to);
        let mut contacts = self.contacts.clone();

        while let Some(top) = contacts.last() {
            let base = contacts.len().checked_sub(2).map_or(anchor, |i| contacts[i].point());
            let side = f64::from(top.orientation) * top.point().minus(base).cross(next.minus(top.point()));
            if side <= EPS {
                contacts.pop();
            } else {
                break;
            }
        }

        let mut from = prev;
        for _ in 0..MAX_WRAPS_PER_MOVE {
            let pivot = contacts.last().map_or(anchor, Contact::point);
            if !segment_blocked(map, pivot, next) {
                break;
            }
            let sweep = from.minus(pivot).cross(next.minus(pivot));
            if sweep.abs() < EPS {
                break;
            }
            let orientation: i8 = if sweep > 0.0 { 1 } else { -1 };
            let Some(corner) = first_hit(map, geometry, pivot, from, next, orientation) else {
                break;
            };
            let hit = Point::new(corner.0 as f64, corner.1 as f64);
            contacts.push(Contact { corner, orientation });
            if let Some(p) = ray_segment_intersection(pivot, hit, from, next) {
                from = p;
            }
        }

        let mut state = TetherState {
            anchor: self.anchor,
            robot: to,
            contacts,
            taut_length: 0.0,
        };
        let pts = state.polyline(map);
        state.taut_length = pts.windows(2).map(|w| w[0].dist(w[1])).sum::<f64>() * map.cell_size();
        Ok(state)
    }
}

/// Convenience wrapper around [`TetherState::advance`] that derives the
/// corner set from `map` on every call.
pub fn update_tether(tether: &TetherState, new_state: VertexId, map: &GridMap) -> Result<TetherState> {
    tether.advance(new_state, map, &TetherGeometry::new(map))
}

fn in_triangle(p: Point, a: Point, b: Point, c: Point) -> bool {
    let d1 = b.minus(a).cross(p.minus(a));
    let d2 = c.minus(b).cross(p.minus(b));
    let d3 = a.minus(c).cross(p.minus(c));
    let has_neg = d1 < -EPS || d2 < -EPS || d3 < -EPS;
    let has_pos = d1 > EPS || d2 > EPS || d3 > EPS;
    !(has_neg && has_pos)
}

fn rotate_about(p: Point, center: Point, angle: f64) -> Point {
    let (s, c) = angle.sin_cos();
    let d = p.minus(center);
    Point::new(center.x + d.x * c - d.y * s, center.y + d.x * s + d.y * c)
}

/// Corner first struck by the segment from `pivot` as its far end sweeps
/// from `from` to `to`.
fn first_hit(
    map: &GridMap,
    geometry: &TetherGeometry,
    pivot: Point,
    from: Point,
    to: Point,
    orientation: i8,
) -> Option<(i64, i64)> {
    let start_dir = from.minus(pivot);
    let mut candidates: Vec<(f64, f64, (i64, i64))> = geometry
        .corners
        .iter()
        .filter_map(|&(x, y)| {
            let q = Point::new(x as f64, y as f64);
            if q.approx_eq(pivot) || !in_triangle(q, pivot, from, to) {
                return None;
            }
            let d = q.minus(pivot);
            let angle = start_dir.cross(d).abs().atan2(start_dir.dot(d));
            Some((angle, d.norm(), (x, y)))
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let probe_angle = f64::from(orientation) * PROBE_ANGLE;
    candidates.into_iter().map(|(_, _, c)| c).find(|&(x, y)| {
        let q = Point::new(x as f64, y as f64);
        let reach = Point::new(q.x + (q.x - pivot.x) * 0.5, q.y + (q.y - pivot.y) * 0.5);
        let probe = rotate_about(reach, pivot, probe_angle);
        [(y - 1, x - 1), (y - 1, x), (y, x - 1), (y, x)]
            .iter()
            .any(|&(r, c)| map.occupied_at(r, c) && crosses_square(pivot, probe, c as f64, r as f64))
    })
}

/// Intersection of the ray `origin -> through` with segment `a-b`.
fn ray_segment_intersection(origin: Point, through: Point, a: Point, b: Point) -> Option<Point> {
    let r = through.minus(origin);
    let s = b.minus(a);
    let denom = r.cross(s);
    if denom.abs() < EPS {
        return None;
    }
    let u = a.minus(origin).cross(r) / denom;
    let u = u.clamp(0.0, 1.0);
    Some(Point::new(a.x + s.x * u, a.y + s.y * u))
}
