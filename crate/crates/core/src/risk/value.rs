use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A failure probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RiskValue(f64);

impl RiskValue {
    pub const ZERO: RiskValue = RiskValue(0.0);
    pub const CERTAIN: RiskValue = RiskValue(1.0);

    /// Rejects NaN and anything outside `[0, 1]`.
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(RiskValue(p))
        } else {
            Err(Error::Precondition(format!("risk {p} is outside [0, 1]")))
        }
    }

    /// Clamps into `[0, 1]`; the flag is set when the input had to be changed.
    /// NaN maps to certain failure.
    pub fn clamped(p: f64) -> (Self, bool) {
        if p.is_nan() {
            (RiskValue::CERTAIN, true)
        } else if p < 0.0 {
            (RiskValue::ZERO, true)
        } else if p > 1.0 {
            (RiskValue::CERTAIN, true)
        } else {
            (RiskValue(p), false)
        }
    }

    pub(crate) fn from_survival(survival: f64) -> Self {
        RiskValue::clamped(1.0 - survival).0
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Probability of not failing, `1 - p`.
    pub fn survival(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for RiskValue {
    type Error = Error;

    fn try_from(p: f64) -> Result<Self> {
        RiskValue::new(p)
    }
}

impl From<RiskValue> for f64 {
    fn from(r: RiskValue) -> f64 {
        r.0
    }
}

impl fmt::Display for RiskValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

/// Probability that none of the conditionally independent elements causes a
/// failure at a state, `prod_k (1 - r_k)`.
///
/// Factors are multiplied in ascending order so the result does not depend
/// on the order of the inputs, bit for bit.
pub fn state_survival(element_risks: &[f64]) -> f64 {
    let mut factors: Vec<f64> = element_risks.iter().map(|r| 1.0 - r).collect();
    factors.sort_by(f64::total_cmp);
    factors.into_iter().product()
}

/// Combined risk at one state: `1 - prod_k (1 - r_k)`.
pub fn compose_state_risk(element_risks: &[RiskValue]) -> RiskValue {
    let raw: Vec<f64> = element_risks.iter().map(|r| r.get()).collect();
    RiskValue::from_survival(state_survival(&raw))
}

/// Risk of a whole path from its per-state risks: `1 - prod_i (1 - state_i)`.
///
/// The product runs from the first state to the last; planners extend the
/// same running product, so both routes agree exactly.
pub fn path_risk_from_states(state_risks: &[f64]) -> RiskValue {
    let survival = state_risks.iter().fold(1.0, |acc, r| acc * (1.0 - r));
    RiskValue::from_survival(survival)
}

/// Rounds to two decimals, half away from zero. Display only.
pub fn round2(x: f64) -> f64 {
    (x * 100.0 + 0.5).floor() / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn risks(values: &[f64]) -> Vec<RiskValue> {
        values.iter().map(|&v| RiskValue::new(v).unwrap()).collect()
    }

    #[test]
    fn table_rows() {
        let row0 = compose_state_risk(&risks(&[0.01, 0.02, 0.0, 0.0, 0.01, 0.0]));
        assert!((row0.get() - 0.039502).abs() < 1e-12);
        assert_eq!(round2(row0.get()), 0.04);

        let row6 = compose_state_risk(&risks(&[0.01, 0.01, 0.06, 0.05, 0.02, 0.0]));
        assert!((row6.get() - 0.142275286).abs() < 1e-12);
        assert_eq!(round2(row6.get()), 0.14);
    }

    #[test]
    fn identities() {
        assert_eq!(compose_state_risk(&risks(&[0.0; 6])), RiskValue::ZERO);
        assert_eq!(compose_state_risk(&risks(&[0.3, 1.0, 0.2])), RiskValue::CERTAIN);
        assert_eq!(compose_state_risk(&[]), RiskValue::ZERO);
        assert_eq!(path_risk_from_states(&[0.0]), RiskValue::ZERO);
    }

    #[test]
    fn rejects_and_clamps() {
        assert!(RiskValue::new(1.5).is_err());
        assert!(RiskValue::new(-0.1).is_err());
        assert!(RiskValue::new(f64::NAN).is_err());
        assert_eq!(RiskValue::clamped(1.2), (RiskValue::CERTAIN, true));
        assert_eq!(RiskValue::clamped(-1.0), (RiskValue::ZERO, true));
        assert_eq!(RiskValue::clamped(0.5), (RiskValue(0.5), false));
        assert!(serde_json::from_str::<RiskValue>("1.5").is_err());
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(round2(0.125), 0.13);
        assert_eq!(round2(0.1149), 0.11);
        assert_eq!(round2(0.0), 0.0);
    }
}
