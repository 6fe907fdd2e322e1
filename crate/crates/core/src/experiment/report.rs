//! Report data model: named tables of cells plus a summary map.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;

/// One table value. Construct through the helper functions so that
/// nonnegative integers are always `UInt` and non-finite reals are `Null`;
/// that keeps the JSON form lossless.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Null,
    Bool(bool),
    UInt(u64),
    Int(i64),
    Real(f64),
    Text(String),
}

impl Cell {
    pub fn uint(v: impl Into<u128>) -> Cell {
        let v = v.into();
        u64::try_from(v).map_or_else(|_| Cell::Text(v.to_string()), Cell::UInt)
    }

    pub fn int(v: i64) -> Cell {
        if v >= 0 {
            Cell::UInt(v as u64)
        } else {
            Cell::Int(v)
        }
    }

    pub fn real(v: f64) -> Cell {
        if v.is_finite() {
            Cell::Real(v)
        } else {
            Cell::Null
        }
    }

    pub fn opt_real(v: Option<f64>) -> Cell {
        v.map_or(Cell::Null, Cell::real)
    }

    pub fn text(v: impl Into<String>) -> Cell {
        Cell::Text(v.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::UInt(v) => Some(v as f64),
            Cell::Int(v) => Some(v as f64),
            Cell::Real(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match *self {
            Cell::Bool(b) => Some(b),
            _ => None,
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        match *self {
            Cell::UInt(v) => Some(v),
            _ => None,
        }
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::UInt(v as u64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::UInt(v as u64)
    }
}

impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        Cell::uint(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::real(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Section {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Section {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Every value of one column.
    pub fn values(&self, name: &str) -> Vec<&Cell> {
        match self.column(name) {
            Some(i) => self.rows.iter().map(|r| &r[i]).collect(),
            None => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub crate_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub sections: Vec<Section>,
    pub summary: BTreeMap<String, Cell>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn summary_value(&self, key: &str) -> Option<&Cell> {
        self.summary.get(key)
    }
}
