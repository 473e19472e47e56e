//! Versioned CSV tables.
//!
//! Layout:
//!
//! ```text
//! # anisolab-csv v1 table=<name>
//! # config: <echoed config line>
//! col_a,col_b,...
//! 1.000000000000e0,NA,...
//! ```
//!
//! Floats use 12 significant digits after the point in scientific form, so
//! identical runs give byte-identical files.

use std::fmt::Write as _;

pub const CSV_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    /// Not applicable for this row.
    Na,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => format!("{v:.12e}"),
            Cell::Num(v) if v.is_nan() => "NA".into(),
            Cell::Num(v) if *v > 0.0 => "inf".into(),
            Cell::Num(_) => "-inf".into(),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => {
                if s.contains([',', '"', '\n']) {
                    format!("\"{}\"", s.replace('"', "\"\""))
                } else {
                    s.clone()
                }
            }
            Cell::Na => "NA".into(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    /// Render with the version line and the echoed configuration.
    pub fn render(&self, echo: &[String]) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# anisolab-csv {CSV_VERSION} table={}", self.name);
        for line in echo {
            let _ = writeln!(out, "# config: {line}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_header_echo_and_rows() {
        let mut t = CsvTable::new("demo", &["epsilon", "n", "note"]);
        t.push(vec![0.5.into(), Cell::Na, "a,b".into()]);
        t.push(vec![Cell::Num(f64::NAN), 3usize.into(), "x".into()]);
        let s = t.render(&["beta = 2".to_string()]);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# anisolab-csv v1 table=demo");
        assert_eq!(lines[1], "# config: beta = 2");
        assert_eq!(lines[2], "epsilon,n,note");
        assert_eq!(lines[3], "5.000000000000e-1,NA,\"a,b\"");
        assert_eq!(lines[4], "NA,3,x");
    }

    #[test]
    #[should_panic]
    fn ragged_rows_are_rejected() {
        let mut t = CsvTable::new("demo", &["a", "b"]);
        t.push(vec![Cell::Na]);
    }
}
