//! Risk elements, their evaluators, and probabilistic composition into state
//! and path risk.

mod element;
mod fields;
mod geometry;
mod model;
mod table;
mod tether;
mod value;

pub use element::{
    ActionLengthParams, DepthClass, DistanceParams, ElementKind, ElementParams, MudParams, RiskConfig, RiskElementSpec,
    TetherContactParams, TetherLengthParams, TurnParams, VisibilityParams,
};
pub use fields::{distance_transform, visibility_fraction};
pub use geometry::{line_of_sight, segment_blocked, Point};
pub use model::{eval_element, path_risk, HistoryWindow, PathCursor, RiskModel, StateRisk};
pub use table::{RiskTable, TableRow};
pub use tether::{update_tether, Contact, TetherGeometry, TetherState};
pub use value::{compose_state_risk, path_risk_from_states, round2, state_survival, RiskValue};
