//! Tables, CSV/JSON encoding and run manifests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format_real(*v),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Real(v) if v.is_finite() => json!(v),
            Cell::Real(_) | Cell::Empty => Value::Null,
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
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

/// Shortest round-trip form; scientific notation outside [1e-4, 1e15).
fn format_real(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn encode(&self, format: Format) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::text))?;
                }
                w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
            }
            Format::Json => {
                let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
                let doc = json!({ "columns": self.columns, "rows": rows });
                let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| CliError::Usage(e.to_string()))?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
    /// Summary lines that do not fit the table.
    pub notes: Vec<String>,
    pub status: String,
}

impl RunManifest {
    pub fn new(command: &str, parameters: BTreeMap<String, String>, notes: Vec<String>, status: &str) -> Self {
        let seed = parameters.get("seed").and_then(|s| s.parse().ok());
        Self {
            command: command.to_string(),
            parameters,
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            notes,
            status: status.to_string(),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Write { path: path.into(), source })
}

/// Table to `output` or stdout; manifest to `manifest`, `<output>.manifest.json`, or stderr.
pub fn emit(
    table: &Table,
    format: Format,
    manifest: &RunManifest,
    output: Option<&Path>,
    manifest_path: Option<&Path>,
) -> Result<(), CliError> {
    let body = table.encode(format)?;
    let mut meta = serde_json::to_vec_pretty(manifest).map_err(|e| CliError::Usage(e.to_string()))?;
    meta.push(b'\n');
    match output {
        Some(p) => write_file(p, &body)?,
        None => std::io::stdout()
            .write_all(&body)
            .map_err(|source| CliError::Write { path: "<stdout>".into(), source })?,
    }
    let sidecar = manifest_path.map(PathBuf::from).or_else(|| {
        output.map(|p| {
            let mut s = p.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    });
    match sidecar {
        Some(p) => write_file(&p, &meta),
        None => std::io::stderr()
            .write_all(&meta)
            .map_err(|source| CliError::Write { path: "<stderr>".into(), source }),
    }
}
