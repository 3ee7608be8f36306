use serde::Serialize;

use super::element::{DepthClass, ElementParams, RiskConfig, RiskElementSpec};
use super::fields::{distance_transform, visibility_fraction};
use super::tether::{TetherGeometry, TetherState};
use super::value::{state_survival, RiskValue};
use crate::error::{Error, Result};
use crate::workspace::{GridMap, Path, VertexId};

/// Prefix `s_0 .. s_i` of a path; the focus is the last state.
#[derive(Debug, Clone, Copy)]
pub struct HistoryWindow<'a> {
    states: &'a [VertexId],
}

impl<'a> HistoryWindow<'a> {
    pub fn new(states: &'a [VertexId]) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Precondition("history window is empty".into()));
        }
        Ok(HistoryWindow { states })
    }

    pub fn states(&self) -> &'a [VertexId] {
        self.states
    }

    pub fn focus(&self) -> VertexId {
        self.states[self.states.len() - 1]
    }

    /// Index of the focus state along the path.
    pub fn index(&self) -> usize {
        self.states.len() - 1
    }

    /// State `back` steps before the focus, if the history is that long.
    pub fn back(&self, back: usize) -> Option<VertexId> {
        self.index().checked_sub(back).map(|i| self.states[i])
    }
}

/// Risks at one state of a path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateRisk {
    pub element_risks: Vec<RiskValue>,
    pub state_risk: RiskValue,
    #[serde(skip)]
    pub survival: f64,
}

impl StateRisk {
    fn from_elements(element_risks: Vec<RiskValue>) -> Self {
        let raw: Vec<f64> = element_risks.iter().map(|r| r.get()).collect();
        let survival = state_survival(&raw);
        StateRisk {
            element_risks,
            state_risk: RiskValue::from_survival(survival),
            survival,
        }
    }
}

/// History-dependent state carried along a path for traverse elements.
#[derive(Debug, Clone)]
struct Traverse {
    tether: Option<TetherState>,
    /// Mud states strictly before the current one.
    mud_before: usize,
    on_mud: bool,
}

/// Risk evaluator for one configuration on one map.
///
/// Occupancy-derived fields (distance transform, visibility fractions,
/// obstacle corners) are computed once here; every evaluation after that is a
/// pure function of the history window.
#[derive(Debug, Clone)]
pub struct RiskModel {
    map: GridMap,
    config: RiskConfig,
    distance: Option<Vec<f64>>,
    visibility: Vec<Option<Vec<f64>>>,
    tether: Option<TetherGeometry>,
}

impl RiskModel {
    pub fn new(map: &GridMap, config: &RiskConfig) -> Result<Self> {
        if config.is_empty() {
            return Err(Error::Config("risk configuration has no elements".into()));
        }
        let elements = config.elements();
        let distance = elements
            .iter()
            .any(|e| matches!(e.params(), ElementParams::Distance(_)))
            .then(|| distance_transform(map));
        let visibility = elements
            .iter()
            .map(|e| match e.params() {
                ElementParams::Visibility(p) => Some(visibility_fraction(map, p.radius)),
                _ => None,
            })
            .collect();
        let tether = elements
            .iter()
            .any(|e| {
                matches!(
                    e.params(),
                    ElementParams::TetherLength(_) | ElementParams::TetherContacts(_)
                )
            })
            .then(|| TetherGeometry::new(map));
        Ok(RiskModel {
            map: map.clone(),
            config: config.clone(),
            distance,
            visibility,
            tether,
        })
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn config(&self) -> &RiskConfig {
        &self.config
    }

    pub fn elements(&self) -> &[RiskElementSpec] {
        self.config.elements()
    }

    /// Number of trailing states an evaluation reads: 1 for locale-only
    /// configurations, 3 with action elements, `None` when the full prefix
    /// matters.
    pub fn history_depth(&self) -> Option<usize> {
        match self.config.depth_class() {
            Some(DepthClass::Locale) | None => Some(1),
            Some(DepthClass::Action) => Some(3),
            Some(DepthClass::Traverse) => None,
        }
    }

    fn check_state(&self, v: VertexId) -> Result<()> {
        if !self.map.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
        if self.map.is_occupied(v) {
            return Err(Error::Precondition(format!("state {v} is an occupied cell")));
        }
        Ok(())
    }

    fn start_traverse(&self, s0: VertexId) -> Result<Traverse> {
        Ok(Traverse {
            tether: match self.tether {
                Some(_) => Some(TetherState::new(s0, &self.map)?),
                None => None,
            },
            mud_before: 0,
            on_mud: self.map.is_mud(s0),
        })
    }

    fn step_traverse(&self, t: &Traverse, next: VertexId) -> Result<Traverse> {
        let tether = match (&t.tether, &self.tether) {
            (Some(state), Some(geometry)) => Some(state.advance(next, &self.map, geometry)?),
            _ => None,
        };
        Ok(Traverse {
            tether,
            mud_before: t.mud_before + usize::from(t.on_mud),
            on_mud: self.map.is_mud(next),
        })
    }

    fn traverse_to(&self, window: &HistoryWindow) -> Result<Traverse> {
        let states = window.states();
        let mut t = self.start_traverse(states[0])?;
        for &s in &states[1..] {
            t = self.step_traverse(&t, s)?;
        }
        Ok(t)
    }

    fn evaluate(&self, k: usize, window: &HistoryWindow, traverse: &Traverse) -> RiskValue {
        let focus = window.focus();
        let map = &self.map;
        let raw = match *self.elements()[k].params() {
            ElementParams::Distance(p) => {
                let d = self.distance.as_ref().expect("distance field")[focus.0];
                if d < p.d_max {
                    p.p_max * (1.0 - d / p.d_max)
                } else {
                    0.0
                }
            }
            ElementParams::Visibility(p) => {
                let seen = self.visibility[k].as_ref().expect("visibility field")[focus.0];
                p.p_max * (1.0 - seen)
            }
            ElementParams::ActionLength(p) => match window.back(1) {
                Some(prev) => p.p_len * step_length(map, prev, focus),
                None => 0.0,
            },
            ElementParams::Turn(p) => match (window.back(2), window.back(1)) {
                (Some(a), Some(b)) => p.p_turn * turn_angle_deg(map, a, b, focus) / 180.0,
                _ => 0.0,
            },
            ElementParams::TetherLength(p) => {
                let len = traverse.tether.as_ref().expect("tether").taut_length();
                p.p_tether * (len / p.l_max).min(1.0)
            }
            ElementParams::TetherContacts(p) => {
                let n = traverse.tether.as_ref().expect("tether").contact_count();
                (p.p_contact * n as f64).min(p.p_max)
            }
            ElementParams::Mud(p) => {
                if traverse.on_mud {
                    (p.p_base + p.p_per_mud * traverse.mud_before as f64).min(p.p_max)
                } else {
                    0.0
                }
            }
        };
        RiskValue::clamped(raw).0
    }

    fn state_at(&self, window: &HistoryWindow, traverse: &Traverse) -> StateRisk {
        StateRisk::from_elements(
            (0..self.elements().len())
                .map(|k| self.evaluate(k, window, traverse))
                .collect(),
        )
    }

    /// Risk of element `k` at the focus of `window`.
    pub fn element_risk(&self, k: usize, window: &HistoryWindow) -> Result<RiskValue> {
        window.states().iter().try_for_each(|&s| self.check_state(s))?;
        let traverse = self.traverse_to(window)?;
        Ok(self.evaluate(k, window, &traverse))
    }

    /// All element risks and the composed state risk at the focus of `window`.
    pub fn state_risk(&self, window: &HistoryWindow) -> Result<StateRisk> {
        window.states().iter().try_for_each(|&s| self.check_state(s))?;
        let traverse = self.traverse_to(window)?;
        Ok(self.state_at(window, &traverse))
    }

    /// Risks at every state of `states`, each evaluated on its own prefix.
    pub fn per_state(&self, states: &[VertexId]) -> Result<Vec<StateRisk>> {
        HistoryWindow::new(states)?;
        states.iter().try_for_each(|&s| self.check_state(s))?;
        let mut traverse = self.start_traverse(states[0])?;
        let mut out = Vec::with_capacity(states.len());
        for i in 0..states.len() {
            if i > 0 {
                traverse = self.step_traverse(&traverse, states[i])?;
            }
            let window = HistoryWindow { states: &states[..=i] };
            out.push(self.state_at(&window, &traverse));
        }
        Ok(out)
    }

    /// Probability of finishing every state, multiplied from the first state on.
    pub fn path_survival(&self, states: &[VertexId]) -> Result<f64> {
        Ok(self.per_state(states)?.iter().fold(1.0, |acc, s| acc * s.survival))
    }

    /// Probability of failing somewhere along the path.
    pub fn path_risk(&self, path: &Path) -> Result<RiskValue> {
        self.check_moves(path.states())?;
        Ok(RiskValue::from_survival(self.path_survival(path.states())?))
    }

    /// Consecutive states must be distinct cells within one king move.
    fn check_moves(&self, states: &[VertexId]) -> Result<()> {
        for (index, w) in states.windows(2).enumerate() {
            let (a, b) = (self.map.cell(w[0]), self.map.cell(w[1]));
            let (dr, dc) = (a.row.abs_diff(b.row), a.col.abs_diff(b.col));
            if dr > 1 || dc > 1 || (dr == 0 && dc == 0) {
                return Err(Error::Infeasible { index });
            }
        }
        Ok(())
    }
}

/// Evaluation state at the end of a partial path, for callers that grow
/// paths one state at a time.
#[derive(Debug, Clone)]
pub struct PathCursor {
    traverse: Traverse,
}

impl RiskModel {
    /// Cursor and risks for the single-state path `[s0]`.
    pub fn begin(&self, s0: VertexId) -> Result<(PathCursor, StateRisk)> {
        self.check_state(s0)?;
        let traverse = self.start_traverse(s0)?;
        let risk = self.state_at(&HistoryWindow { states: &[s0] }, &traverse);
        Ok((PathCursor { traverse }, risk))
    }

    /// Extends the path held by `cursor` to `states`, whose last element is
    /// the new state and whose other elements are the cursor's path.
    pub fn extend(&self, cursor: &PathCursor, states: &[VertexId]) -> Result<(PathCursor, StateRisk)> {
        let window = HistoryWindow::new(states)?;
        self.check_state(window.focus())?;
        let traverse = self.step_traverse(&cursor.traverse, window.focus())?;
        let risk = self.state_at(&window, &traverse);
        Ok((PathCursor { traverse }, risk))
    }
}

fn step_length(map: &GridMap, a: VertexId, b: VertexId) -> f64 {
    let (ca, cb) = (map.cell(a), map.cell(b));
    (ca.row as f64 - cb.row as f64).hypot(ca.col as f64 - cb.col as f64)
}

/// Heading change at `b` between moves `a -> b` and `b -> c`, in degrees.
fn turn_angle_deg(map: &GridMap, a: VertexId, b: VertexId, c: VertexId) -> f64 {
    let (ca, cb, cc) = (map.cell(a), map.cell(b), map.cell(c));
    let u = (cb.col as f64 - ca.col as f64, cb.row as f64 - ca.row as f64);
    let v = (cc.col as f64 - cb.col as f64, cc.row as f64 - cb.row as f64);
    let cross = u.0 * v.1 - u.1 * v.0;
    let dot = u.0 * v.0 + u.1 * v.1;
    if (u.0 == 0.0 && u.1 == 0.0) || (v.0 == 0.0 && v.1 == 0.0) {
        return 0.0;
    }
    cross.abs().atan2(dot).to_degrees()
}

/// Evaluates a single element on `window`. Builds the occupancy fields from
/// scratch; use [`RiskModel`] for repeated evaluations.
pub fn eval_element(spec: &RiskElementSpec, window: &HistoryWindow, map: &GridMap) -> Result<RiskValue> {
    RiskModel::new(map, &RiskConfig::new(vec![*spec]))?.element_risk(0, window)
}

/// Risk of `path` under the configured elements.
pub fn path_risk(path: &Path, config: &RiskConfig, map: &GridMap) -> Result<RiskValue> {
    RiskModel::new(map, config)?.path_risk(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workspace::Cell;

    fn ids(map: &GridMap, cells: &[(usize, usize)]) -> Vec<VertexId> {
        cells.iter().map(|&(r, c)| map.id(Cell::new(r, c)).unwrap()).collect()
    }

    #[test]
    fn turn_is_zero_without_history_or_when_straight() {
        let map = GridMap::parse("...\n...\n...\n").unwrap();
        let turn = RiskElementSpec::turn(0.1).unwrap();
        let single = ids(&map, &[(1, 1)]);
        assert_eq!(
            eval_element(&turn, &HistoryWindow::new(&single).unwrap(), &map)
                .unwrap()
                .get(),
            0.0
        );
        let straight = ids(&map, &[(0, 0), (1, 1), (2, 2)]);
        assert_eq!(
            eval_element(&turn, &HistoryWindow::new(&straight).unwrap(), &map)
                .unwrap()
                .get(),
            0.0
        );
        let corner = ids(&map, &[(0, 0), (0, 1), (1, 1)]);
        let r = eval_element(&turn, &HistoryWindow::new(&corner).unwrap(), &map).unwrap();
        assert!((r.get() - 0.05).abs() < 1e-12);
    }

    #[test]
    fn distance_next_to_obstacle() {
        let map = GridMap::parse("......\n.#....\n......\n").unwrap();
        let spec = RiskElementSpec::distance(5.0, 0.05).unwrap();
        let s = ids(&map, &[(1, 2)]);
        let r = eval_element(&spec, &HistoryWindow::new(&s).unwrap(), &map).unwrap();
        assert!((r.get() - 0.04).abs() < 1e-12);
        let far = ids(&map, &[(1, 5)]);
        let r = eval_element(&spec, &HistoryWindow::new(&far).unwrap(), &map).unwrap();
        assert!((r.get() - 0.05 * (1.0 - 4.0 / 5.0)).abs() < 1e-12);
    }

    #[test]
    fn action_length_is_zero_at_start_and_scales_with_step() {
        let map = GridMap::parse("...\n...\n").unwrap();
        let spec = RiskElementSpec::action_length(0.04).unwrap();
        let model = RiskModel::new(&map, &RiskConfig::new(vec![spec])).unwrap();
        let states = ids(&map, &[(0, 0), (0, 1), (1, 2)]);
        let per = model.per_state(&states).unwrap();
        assert_eq!(per[0].element_risks[0].get(), 0.0);
        assert!((per[1].element_risks[0].get() - 0.04).abs() < 1e-15);
        assert!((per[2].element_risks[0].get() - 0.04 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tether_contacts_zero_on_straight_corridor() {
        let map = GridMap::parse("#######\n.......\n#######\n").unwrap();
        let spec = RiskElementSpec::tether_contacts(0.02, 0.06).unwrap();
        let model = RiskModel::new(&map, &RiskConfig::new(vec![spec])).unwrap();
        let states = ids(&map, &[(1, 0), (1, 1), (1, 2), (1, 3), (1, 4), (1, 5), (1, 6)]);
        assert!(model
            .per_state(&states)
            .unwrap()
            .iter()
            .all(|s| s.state_risk.get() == 0.0));
    }

    #[test]
    fn mud_accumulates_over_the_whole_prefix() {
        let map = GridMap::parse("~..~.\n").unwrap();
        let spec = RiskElementSpec::mud(0.05, 0.3, 0.9).unwrap();
        let model = RiskModel::new(&map, &RiskConfig::new(vec![spec])).unwrap();
        let states = ids(&map, &[(0, 0), (0, 1), (0, 2), (0, 3), (0, 4)]);
        let per: Vec<f64> = model
            .per_state(&states)
            .unwrap()
            .iter()
            .map(|s| s.element_risks[0].get())
            .collect();
        assert_eq!(per, vec![0.05, 0.0, 0.0, 0.35, 0.0]);
    }

    #[test]
    fn single_state_zero_risk() {
        let map = GridMap::parse("..\n").unwrap();
        let cfg = RiskConfig::new(vec![RiskElementSpec::turn(0.1).unwrap()]);
        let r = path_risk(&Path::singleton(VertexId(0)), &cfg, &map).unwrap();
        assert_eq!(r, RiskValue::ZERO);
    }

    #[test]
    fn errors() {
        let map = GridMap::parse(".#.\n...\n").unwrap();
        let cfg = RiskConfig::new(vec![RiskElementSpec::turn(0.1).unwrap()]);
        let model = RiskModel::new(&map, &cfg).unwrap();
        let bad = Path::new(vec![VertexId(0), VertexId(2)]).unwrap();
        assert!(matches!(model.path_risk(&bad), Err(Error::Infeasible { index: 0 })));
        assert!(HistoryWindow::new(&[]).is_err());
        assert!(RiskModel::new(&map, &RiskConfig::new(vec![])).is_err());
        let occupied = [VertexId(1)];
        assert!(model.state_risk(&HistoryWindow::new(&occupied).unwrap()).is_err());
    }
}
