//! Flat result tables with '#'-prefixed metadata, rendered as CSV.
//!
//! Cells are numeric, `inf`, or `infeasible` — never NaN. Float cells go
//! through Rust's shortest-roundtrip formatting, so a table is
//! byte-reproducible for identical inputs.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    /// Float rendered with a fixed number of decimals.
    Fixed(f64, usize),
    Text(String),
    Infeasible,
    Inf,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => {
                assert!(!v.is_nan(), "NaN must never reach a result table");
                if v.is_infinite() {
                    "inf".to_string()
                } else {
                    format!("{v}")
                }
            }
            Cell::Fixed(v, places) => {
                assert!(!v.is_nan(), "NaN must never reach a result table");
                if v.is_infinite() {
                    "inf".to_string()
                } else {
                    format!("{v:.places$}")
                }
            }
            Cell::Text(s) => s.clone(),
            Cell::Infeasible => "infeasible".to_string(),
            Cell::Inf => "inf".to_string(),
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, Cell::Infeasible)
    }
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    metadata: Vec<(String, String)>,
    headers: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new<S: Into<String>>(headers: Vec<S>) -> Self {
        Self {
            metadata: Vec::new(),
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.headers.len(), "table must stay rectangular");
        self.rows.push(row);
    }

    /// True when at least one row marked a feasibility-bearing cell and
    /// every such row is infeasible.
    pub fn all_infeasible(&self) -> bool {
        let mut saw_marker = false;
        let mut saw_feasible = false;
        for row in &self.rows {
            if row.iter().any(Cell::is_infeasible) {
                saw_marker = true;
            } else {
                saw_feasible = true;
            }
        }
        saw_marker && !saw_feasible
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "{}", self.headers.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

/// FNV-1a 64-bit hash; stable across platforms and releases, used to
/// fingerprint scenarios in the CSV metadata.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
