use std::fmt;
use std::path::Path as FsPath;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How far back into the traversed history an element looks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthClass {
    /// Current state only.
    Locale,
    /// Current state and the two before it.
    Action,
    /// The full prefix back to the start.
    Traverse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Distance,
    Visibility,
    ActionLength,
    Turn,
    TetherLength,
    TetherContacts,
    Mud,
}

impl ElementKind {
    pub fn depth_class(self) -> DepthClass {
        match self {
            ElementKind::Distance | ElementKind::Visibility => DepthClass::Locale,
            ElementKind::ActionLength | ElementKind::Turn => DepthClass::Action,
            ElementKind::TetherLength | ElementKind::TetherContacts | ElementKind::Mud => DepthClass::Traverse,
        }
    }

    /// Column header used in per-state risk tables.
    pub fn column(self) -> &'static str {
        match self {
            ElementKind::Distance => "Dist.",
            ElementKind::Visibility => "Vis.",
            ElementKind::ActionLength => "A. L.",
            ElementKind::Turn => "Turn",
            ElementKind::TetherLength => "T. L.",
            ElementKind::TetherContacts => "Cont. #",
            ElementKind::Mud => "Mud",
        }
    }

    pub fn from_column(header: &str) -> Option<Self> {
        ALL_KINDS.iter().copied().find(|k| k.column() == header)
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementKind::Distance => "distance",
            ElementKind::Visibility => "visibility",
            ElementKind::ActionLength => "action_length",
            ElementKind::Turn => "turn",
            ElementKind::TetherLength => "tether_length",
            ElementKind::TetherContacts => "tether_contacts",
            ElementKind::Mud => "mud",
        }
    }
}

const ALL_KINDS: [ElementKind; 7] = [
    ElementKind::Distance,
    ElementKind::Visibility,
    ElementKind::ActionLength,
    ElementKind::Turn,
    ElementKind::TetherLength,
    ElementKind::TetherContacts,
    ElementKind::Mud,
];

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `r = p_max * (1 - d / d_max)` for obstacle distance `d < d_max` (cells).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceParams {
    pub d_max: f64,
    pub p_max: f64,
}

/// `r = p_max * (1 - visible / max_visible)` over cells within `radius` (cells).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisibilityParams {
    pub radius: f64,
    pub p_max: f64,
}

/// `r = p_len * step length` (cells); zero at the first state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionLengthParams {
    pub p_len: f64,
}

/// `r = p_turn * theta / 180deg` for the heading change into the current state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurnParams {
    pub p_turn: f64,
}

/// `r = p_tether * min(1, taut_length / l_max)`, lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TetherLengthParams {
    pub p_tether: f64,
    pub l_max: f64,
}

/// `r = min(p_max, p_contact * contacts)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TetherContactParams {
    pub p_contact: f64,
    pub p_max: f64,
}

/// On a mud cell, `r = min(p_max, p_base + p_per_mud * earlier mud states)`;
/// zero elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MudParams {
    pub p_base: f64,
    pub p_per_mud: f64,
    pub p_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementParams {
    Distance(DistanceParams),
    Visibility(VisibilityParams),
    ActionLength(ActionLengthParams),
    Turn(TurnParams),
    TetherLength(TetherLengthParams),
    TetherContacts(TetherContactParams),
    Mud(MudParams),
}

impl ElementParams {
    pub fn kind(&self) -> ElementKind {
        match self {
            ElementParams::Distance(_) => ElementKind::Distance,
            ElementParams::Visibility(_) => ElementKind::Visibility,
            ElementParams::ActionLength(_) => ElementKind::ActionLength,
            ElementParams::Turn(_) => ElementKind::Turn,
            ElementParams::TetherLength(_) => ElementKind::TetherLength,
            ElementParams::TetherContacts(_) => ElementKind::TetherContacts,
            ElementParams::Mud(_) => ElementKind::Mud,
        }
    }

    fn validate(&self) -> Result<()> {
        let probability = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")))
            }
        };
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {x}")))
            }
        };
        match *self {
            ElementParams::Distance(p) => {
                positive("d_max", p.d_max)?;
                probability("p_max", p.p_max)
            }
            ElementParams::Visibility(p) => {
                positive("radius", p.radius)?;
                probability("p_max", p.p_max)
            }
            ElementParams::ActionLength(p) => probability("p_len", p.p_len),
            ElementParams::Turn(p) => probability("p_turn", p.p_turn),
            ElementParams::TetherLength(p) => {
                positive("l_max", p.l_max)?;
                probability("p_tether", p.p_tether)
            }
            ElementParams::TetherContacts(p) => {
                probability("p_contact", p.p_contact)?;
                probability("p_max", p.p_max)
            }
            ElementParams::Mud(p) => {
                probability("p_base", p.p_base)?;
                probability("p_per_mud", p.p_per_mud)?;
                probability("p_max", p.p_max)
            }
        }
    }
}

/// One configured risk element. Its position in the configuration is the
/// element index used for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct RiskElementSpec {
    params: ElementParams,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: ElementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    depth_class: Option<DepthClass>,
    #[serde(default)]
    params: serde_json::Value,
}

impl RiskElementSpec {
    pub fn new(params: ElementParams) -> Result<Self> {
        params.validate()?;
        Ok(RiskElementSpec { params })
    }

    pub fn distance(d_max: f64, p_max: f64) -> Result<Self> {
        Self::new(ElementParams::Distance(DistanceParams { d_max, p_max }))
    }

    pub fn visibility(radius: f64, p_max: f64) -> Result<Self> {
        Self::new(ElementParams::Visibility(VisibilityParams { radius, p_max }))
    }

    pub fn action_length(p_len: f64) -> Result<Self> {
        Self::new(ElementParams::ActionLength(ActionLengthParams { p_len }))
    }

    pub fn turn(p_turn: f64) -> Result<Self> {
        Self::new(ElementParams::Turn(TurnParams { p_turn }))
    }

    pub fn tether_length(p_tether: f64, l_max: f64) -> Result<Self> {
        Self::new(ElementParams::TetherLength(TetherLengthParams { p_tether, l_max }))
    }

    pub fn tether_contacts(p_contact: f64, p_max: f64) -> Result<Self> {
        Self::new(ElementParams::TetherContacts(TetherContactParams { p_contact, p_max }))
    }

    pub fn mud(p_base: f64, p_per_mud: f64, p_max: f64) -> Result<Self> {
        Self::new(ElementParams::Mud(MudParams {
            p_base,
            p_per_mud,
            p_max,
        }))
    }

    pub fn kind(&self) -> ElementKind {
        self.params.kind()
    }

    pub fn depth_class(&self) -> DepthClass {
        self.kind().depth_class()
    }

    pub fn params(&self) -> &ElementParams {
        &self.params
    }
}

fn parse_params<T: DeserializeOwned>(kind: ElementKind, value: serde_json::Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::Config(format!("bad params for {kind}: {e}")))
}

impl TryFrom<RawSpec> for RiskElementSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let kind = raw.kind;
        if let Some(declared) = raw.depth_class {
            if declared != kind.depth_class() {
                return Err(Error::Config(format!(
                    "{kind} is {:?}-dependent, configuration says {declared:?}",
                    kind.depth_class()
                )));
            }
        }
        let v = raw.params;
        let params = match kind {
            ElementKind::Distance => ElementParams::Distance(parse_params(kind, v)?),
            ElementKind::Visibility => ElementParams::Visibility(parse_params(kind, v)?),
            ElementKind::ActionLength => ElementParams::ActionLength(parse_params(kind, v)?),
            ElementKind::Turn => ElementParams::Turn(parse_params(kind, v)?),
            ElementKind::TetherLength => ElementParams::TetherLength(parse_params(kind, v)?),
            ElementKind::TetherContacts => ElementParams::TetherContacts(parse_params(kind, v)?),
            ElementKind::Mud => ElementParams::Mud(parse_params(kind, v)?),
        };
        RiskElementSpec::new(params)
    }
}

impl From<RiskElementSpec> for RawSpec {
    fn from(spec: RiskElementSpec) -> Self {
        let params = match spec.params {
            ElementParams::Distance(p) => serde_json::to_value(p),
            ElementParams::Visibility(p) => serde_json::to_value(p),
            ElementParams::ActionLength(p) => serde_json::to_value(p),
            ElementParams::Turn(p) => serde_json::to_value(p),
            ElementParams::TetherLength(p) => serde_json::to_value(p),
            ElementParams::TetherContacts(p) => serde_json::to_value(p),
            ElementParams::Mud(p) => serde_json::to_value(p),
        }
        .expect("plain parameter structs serialize");
        RawSpec {
            kind: spec.kind(),
            depth_class: Some(spec.depth_class()),
            params,
        }
    }
}

/// Ordered list of risk elements, as read from a risk configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RiskConfig(Vec<RiskElementSpec>);

/// The shipped demo profile.
const DEMO_PROFILE: &str = include_str!("demo_profile.json");

impl RiskConfig {
    pub fn new(elements: Vec<RiskElementSpec>) -> Self {
        RiskConfig(elements)
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| match e.classify() {
            serde_json::error::Category::Data => Error::Config(e.to_string()),
            _ => Error::format(e.line(), e.to_string()),
        })
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Six-element profile whose per-element values stay within 0 to 0.06.
    pub fn demo_profile() -> Self {
        Self::parse(DEMO_PROFILE).expect("shipped profile parses")
    }

    pub fn elements(&self) -> &[RiskElementSpec] {
        &self.0
    }

    pub fn into_elements(self) -> Vec<RiskElementSpec> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Deepest dependency class among the elements.
    pub fn depth_class(&self) -> Option<DepthClass> {
        self.0.iter().map(|e| e.depth_class()).max()
    }

    pub fn locale_only(&self) -> RiskConfig {
        RiskConfig(
            self.0
                .iter()
                .filter(|e| e.depth_class() == DepthClass::Locale)
                .copied()
                .collect(),
        )
    }

    pub fn columns(&self) -> Vec<&'static str> {
        self.0.iter().map(|e| e.kind().column()).collect()
    }
}
