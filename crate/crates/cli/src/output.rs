//! JSON and CSV emission.

use std::io::Write;
use std::path::Path;

use ruinld_core::SampledPath;
use serde_json::Value;

use crate::CliError;

/// A finite number, or `null`.
pub fn number(x: f64) -> Value {
    Value::from(x)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn from_path(path: &SampledPath) -> Self {
        let mut t = Table::new(vec!["t", "value"]);
        for (s, x) in path.iter() {
            t.push(vec![s.into(), x.into()]);
        }
        t
    }

    pub fn from_pair(x: &SampledPath, y: &SampledPath) -> Self {
        let mut t = Table::new(vec!["t", "x", "y"]);
        for ((s, a), b) in x.iter().zip(&y.values) {
            t.push(vec![s.into(), a.into(), (*b).into()]);
        }
        t
    }

    /// Appends `(curve, x, y)` rows for every point of `path`.
    pub fn push_curve(&mut self, curve: &str, path: &SampledPath) {
        for (s, v) in path.iter() {
            self.push(vec![curve.into(), s.into(), v.into()]);
        }
    }

    /// Columns become arrays keyed by the header names.
    pub fn to_json(&self, params: Value) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("params".into(), params);
        for (k, name) in self.header.iter().enumerate() {
            let col = self
                .rows
                .iter()
                .map(|r| match &r[k] {
                    Cell::Num(x) => number(*x),
                    Cell::Text(s) => Value::from(s.as_str()),
                })
                .collect();
            obj.insert((*name).into(), Value::Array(col));
        }
        Value::Object(obj)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Json(Value),
    Csv(Table),
}

fn render(artifact: &Artifact) -> Result<Vec<u8>, CliError> {
    match artifact {
        Artifact::Json(v) => {
            let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Artifact::Csv(table) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.header).map_err(|e| CliError::Io(e.to_string()))?;
            for row in &table.rows {
                let fields = row.iter().map(|c| match c {
                    Cell::Num(x) => x.to_string(),
                    Cell::Text(s) => s.clone(),
                });
                w.write_record(fields).map_err(|e| CliError::Io(e.to_string()))?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

pub fn emit(artifact: &Artifact, out: Option<&Path>) -> Result<(), CliError> {
    let bytes = render(artifact)?;
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout().lock().write_all(&bytes).map_err(|e| CliError::Io(e.to_string())),
    }
}
