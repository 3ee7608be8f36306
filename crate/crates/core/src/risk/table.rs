//! Per-state risk tables: one row per path state, one column per element,
//! and a final `State` column with the composed state risk.

use std::fmt::Write as _;

use super::model::StateRisk;
use super::value::{compose_state_risk, path_risk_from_states, round2, RiskValue};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub index: usize,
    pub element_risks: Vec<RiskValue>,
    /// State risk as written in the table, if it had a `State` column.
    pub state: Option<RiskValue>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskTable {
    columns: Vec<String>,
    rows: Vec<TableRow>,
}

/// Demo red path: per-element risks followed by the printed state risk.
const DEMO_RED: [[f64; 7]; 11] = [
    [0.01, 0.02, 0.0, 0.0, 0.01, 0.0, 0.04],
    [0.01, 0.02, 0.04, 0.0, 0.01, 0.0, 0.08],
    [0.01, 0.02, 0.04, 0.0, 0.01, 0.0, 0.08],
    [0.01, 0.02, 0.04, 0.0, 0.01, 0.0, 0.08],
    [0.01, 0.01, 0.04, 0.0, 0.02, 0.0, 0.08],
    [0.01, 0.01, 0.04, 0.0, 0.02, 0.0, 0.08],
    [0.01, 0.01, 0.06, 0.05, 0.02, 0.0, 0.14],
    [0.01, 0.01, 0.05, 0.05, 0.03, 0.0, 0.14],
    [0.01, 0.01, 0.05, 0.0, 0.04, 0.0, 0.11],
    [0.02, 0.02, 0.04, 0.05, 0.04, 0.0, 0.16],
    [0.03, 0.04, 0.05, 0.05, 0.04, 0.0, 0.19],
];

const DEMO_GREEN: [[f64; 7]; 8] = [
    [0.01, 0.02, 0.0, 0.0, 0.01, 0.0, 0.04],
    [0.01, 0.02, 0.04, 0.0, 0.01, 0.0, 0.08],
    [0.01, 0.02, 0.04, 0.0, 0.01, 0.0, 0.08],
    [0.01, 0.02, 0.04, 0.0, 0.01, 0.0, 0.08],
    [0.03, 0.01, 0.06, 0.05, 0.02, 0.0, 0.16],
    [0.04, 0.01, 0.06, 0.0, 0.02, 0.0, 0.12],
    [0.02, 0.01, 0.06, 0.0, 0.03, 0.0, 0.12],
    [0.01, 0.0, 0.05, 0.05, 0.03, 0.0, 0.13],
];

const DEMO_COLUMNS: [&str; 6] = ["Dist.", "Vis.", "A. L.", "Turn", "T. L.", "Cont. #"];

impl RiskTable {
    pub fn new(columns: Vec<String>, rows: Vec<TableRow>) -> Result<Self> {
        for row in &rows {
            if row.element_risks.len() != columns.len() {
                return Err(Error::format(
                    row.index + 2,
                    format!(
                        "row has {} values for {} columns",
                        row.element_risks.len(),
                        columns.len()
                    ),
                ));
            }
        }
        Ok(RiskTable { columns, rows })
    }

    fn from_consts(rows: &[[f64; 7]]) -> Self {
        let rows = rows
            .iter()
            .enumerate()
            .map(|(index, r)| TableRow {
                index,
                element_risks: r[..6].iter().map(|&p| RiskValue::new(p).unwrap()).collect(),
                state: Some(RiskValue::new(r[6]).unwrap()),
            })
            .collect();
        RiskTable {
            columns: DEMO_COLUMNS.iter().map(|s| s.to_string()).collect(),
            rows,
        }
    }

    /// Staircase demo: the high-clearance path with several turns.
    pub fn demo_red() -> Self {
        Self::from_consts(&DEMO_RED)
    }

    /// Staircase demo: the shorter, straighter path.
    pub fn demo_green() -> Self {
        Self::from_consts(&DEMO_GREEN)
    }

    /// Table for an evaluated path.
    pub fn from_states(columns: &[&str], states: &[StateRisk]) -> Self {
        RiskTable {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: states
                .iter()
                .enumerate()
                .map(|(index, s)| TableRow {
                    index,
                    element_risks: s.element_risks.clone(),
                    state: Some(s.state_risk),
                })
                .collect(),
        }
    }

    /// Reads the CSV layout `Index,<element columns...>[,State]`.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if headers.first().map(String::as_str) != Some("Index") {
            return Err(Error::format(1, "first column must be `Index`"));
        }
        let has_state = headers.last().map(String::as_str) == Some("State");
        let end = if has_state { headers.len() - 1 } else { headers.len() };
        let columns = headers[1..end].to_vec();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let line = i + 2;
            let value = |j: usize| -> Result<f64> {
                record
                    .get(j)
                    .ok_or_else(|| Error::format(line, "missing value"))?
                    .parse::<f64>()
                    .map_err(|e| Error::format(line, e.to_string()))
            };
            let index = value(0)? as usize;
            let element_risks = (1..end)
                .map(|j| value(j).and_then(RiskValue::new))
                .collect::<Result<Vec<_>>>()?;
            let state = if has_state {
                Some(RiskValue::new(value(end)?)?)
            } else {
                None
            };
            rows.push(TableRow {
                index,
                element_risks,
                state,
            });
        }
        if rows.is_empty() {
            return Err(Error::format(1, "table has no rows"));
        }
        Ok(RiskTable { columns, rows })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse_csv(&std::fs::read_to_string(path)?)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// State risks recomposed from the element columns.
    pub fn composed_states(&self) -> Vec<RiskValue> {
        self.rows.iter().map(|r| compose_state_risk(&r.element_risks)).collect()
    }

    /// The `State` column as written; falls back to the composed value.
    pub fn listed_states(&self) -> Vec<RiskValue> {
        self.rows
            .iter()
            .map(|r| r.state.unwrap_or_else(|| compose_state_risk(&r.element_risks)))
            .collect()
    }

    /// Path risk from the recomposed state risks.
    pub fn path_risk(&self) -> RiskValue {
        let states: Vec<f64> = self.composed_states().iter().map(|r| r.get()).collect();
        path_risk_from_states(&states)
    }

    /// Path risk from the `State` column as written.
    pub fn listed_path_risk(&self) -> RiskValue {
        let states: Vec<f64> = self.listed_states().iter().map(|r| r.get()).collect();
        path_risk_from_states(&states)
    }

    /// Full-precision CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("Index");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push_str(",State\n");
        for (row, state) in self.rows.iter().zip(self.listed_states()) {
            write!(out, "{}", row.index).unwrap();
            for r in &row.element_risks {
                write!(out, ",{r}").unwrap();
            }
            writeln!(out, ",{state}").unwrap();
        }
        out
    }

    /// Fixed-width text rendering with two-decimal values.
    pub fn render(&self) -> String {
        let mut out = String::new();
        write!(out, "{:>5}", "Index").unwrap();
        for c in &self.columns {
            write!(out, " {c:>7}").unwrap();
        }
        writeln!(out, " {:>7}", "State").unwrap();
        for (row, state) in self.rows.iter().zip(self.composed_states()) {
            write!(out, "{:>5}", row.index).unwrap();
            for r in &row.element_risks {
                write!(out, " {:>7.2}", round2(r.get())).unwrap();
            }
            writeln!(out, " {:>7.2}", round2(state.get())).unwrap();
        }
        out
    }
}
