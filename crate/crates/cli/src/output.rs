//! Result tables and their CSV/JSON encodings.
//!
//! Column meanings and units are listed in `docs/formats.md`. Any change to
//! the column set of a table bumps [`FORMAT_VERSION`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::Format;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
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

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

/// 17 significant digits, enough to round-trip any f64.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn csv_field(c: &Cell) -> String {
    match c {
        Cell::Float(v) => format_float(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Bool(v) => v.to_string(),
        Cell::Empty => String::new(),
        Cell::Text(s) => {
            if s.contains([',', '"', '\n', '\r']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Float(v) if v.is_finite() => json!(v),
        Cell::Float(_) | Cell::Empty => Value::Null,
        Cell::Int(v) => json!(v),
        Cell::Bool(v) => json!(v),
        Cell::Text(s) => json!(s),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }
}

/// What identifies a run: the command, the config bytes and the seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
}

impl Provenance {
    pub fn new(command: &str, config_source: &str, seed: u64) -> Self {
        let digest = Sha256::digest(config_source.as_bytes());
        let config_sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
        Self { command: command.into(), config_sha256, seed, version: env!("CARGO_PKG_VERSION").into() }
    }
}

/// Table plus command-specific detail, ready to encode.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub provenance: Provenance,
    pub table: Table,
    pub details: Value,
}

impl Report {
    pub fn to_csv(&self) -> String {
        let p = &self.provenance;
        let mut out = format!(
            "# pitchfork-format {FORMAT_VERSION} command={} version={} seed={} config_sha256={}\n",
            p.command, p.version, p.seed, p.config_sha256
        );
        out.push_str(&self.table.columns.join(","));
        out.push('\n');
        for row in &self.table.rows {
            let fields: Vec<String> = row.iter().map(csv_field).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self.table.rows.iter().map(|r| Value::Array(r.iter().map(json_cell).collect())).collect();
        let v = json!({
            "format_version": FORMAT_VERSION,
            "provenance": self.provenance,
            "columns": self.table.columns,
            "rows": rows,
            "details": self.details,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("report values serialize");
        s.push('\n');
        s
    }

    pub fn encode(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Files written by one run. Dropping it without `commit` deletes them, so
/// a failed run leaves no partial outputs.
#[derive(Debug, Default)]
pub struct OutputSet {
    written: Vec<PathBuf>,
    committed: bool,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> std::io::Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        self.written.push(path.to_path_buf());
        let mut f = fs::File::create(path)?;
        f.write_all(bytes)?;
        f.sync_all()
    }

    pub fn paths(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for OutputSet {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> Report {
        let mut t = Table::new(vec!["epsilon", "p_right", "label"]);
        t.push(vec![0.1.into(), Cell::Float(1.0 / 3.0), "a,b".into()]);
        t.push(vec![Cell::Float(f64::NAN), Cell::Empty, "x".into()]);
        Report { provenance: Provenance::new("sweep", "seed = 1\n", 1), table: t, details: Value::Null }
    }

    #[test]
    fn floats_round_trip() {
        for v in [1.0 / 3.0, 1e-300, -2.5e17, 0.1 + 0.2] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_layout() {
        let csv = report().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# pitchfork-format 1 command=sweep"));
        assert_eq!(lines[1], "epsilon,p_right,label");
        assert_eq!(lines[2], "1.0000000000000001e-1,3.3333333333333331e-1,\"a,b\"");
        assert_eq!(lines[3], "NaN,,x");
    }

    #[test]
    fn json_mirrors_columns() {
        let v: Value = serde_json::from_str(&report().to_json()).unwrap();
        assert_eq!(v["columns"][1], "p_right");
        assert_eq!(v["rows"][0][0], 0.1);
        assert!(v["rows"][1][0].is_null());
        assert_eq!(v["provenance"]["seed"], 1);
        assert_eq!(v["provenance"]["config_sha256"].as_str().unwrap().len(), 64);
    }

    #[test]
    fn uncommitted_outputs_are_removed() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        {
            let mut set = OutputSet::new();
            set.write(&a, b"x").unwrap();
            assert!(a.exists());
        }
        assert!(!a.exists());
        let mut set = OutputSet::new();
        set.write(&a, b"x").unwrap();
        set.commit();
        assert!(a.exists());
    }
}
