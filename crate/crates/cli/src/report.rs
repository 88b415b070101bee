use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

pub const TOOL: &str = "specdisc";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(v) => write!(f, "{v}"),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        // Writing into memory cannot fail.
        w.write_record(&self.columns).expect("in-memory csv");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))
                .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }

    /// Two-column `x y` text for each numeric column after the first, keyed by column name.
    pub fn plot_data(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for c in 1..self.columns.len() {
            let mut body = format!("# {} {}\n", self.columns[0], self.columns[c]);
            let mut any = false;
            for row in &self.rows {
                if let (Some(x), Some(y)) = (row[0].as_f64(), row[c].as_f64()) {
                    body.push_str(&format!("{x} {y}\n"));
                    any = true;
                }
            }
            if any {
                out.push((self.columns[c].clone(), body));
            }
        }
        out
    }
}

/// Everything a run produces. Contains no timestamps or host data, so equal inputs give
/// byte-identical output.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    pub results: Value,
    /// Observations such as divergence flags; these never change the exit code.
    pub verdicts: BTreeMap<String, bool>,
    /// Assertions; any `false` makes the run exit with status 1.
    pub checks: BTreeMap<String, bool>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            inputs: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            results: Value::Null,
            verdicts: BTreeMap::new(),
            checks: BTreeMap::new(),
            tables: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.values().all(|v| *v)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// Text printed on stdout: the whole report as JSON, or the first table as CSV.
pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Csv => report.tables.first().map(Table::to_csv).unwrap_or_default(),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `report.json`, one CSV per table and, with `plot`, `<table>_<column>.dat` files.
pub fn write_artifacts(report: &Report, dir: &Path, plot: bool) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write(&dir.join("report.json"), &report.to_json())?;
    for t in &report.tables {
        write(&dir.join(format!("{}.csv", t.name)), &t.to_csv())?;
        if plot {
            for (col, body) in t.plot_data() {
                write(&dir.join(format!("{}_{}.dat", t.name, sanitize(&col))), &body)?;
            }
        }
    }
    Ok(())
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_text_and_plot_skips_text_columns() {
        let mut t = Table::new("t", &["x", "label", "y"]);
        t.push(vec![1i64.into(), "a,b".into(), 0.5.into()]);
        t.push(vec![2i64.into(), "c".into(), 0.25.into()]);
        assert_eq!(t.to_csv(), "x,label,y\n1,\"a,b\",0.5\n2,c,0.25\n");
        let plots = t.plot_data();
        assert_eq!(plots.len(), 1);
        assert_eq!(plots[0].1, "# x y\n1 0.5\n2 0.25\n");
    }
}
