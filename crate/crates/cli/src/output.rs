//! Comma-separated tables with `#` metadata lines, or json-lines records.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::{Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => u8::from(*b).to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
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

/// Shortest round-trip text, switching to exponent form outside `[1e-4, 1e6)`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self { name, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Writes tables into one directory, each starting with the same provenance line.
pub struct Emitter {
    dir: PathBuf,
    format: Format,
    header: String,
}

impl Emitter {
    pub fn new(dir: &Path, format: Format, command: &str, model: &str, resolution: &str) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let header = format!(
            "warpcmc {} | {command} | model: {model} | resolution: {resolution}",
            env!("CARGO_PKG_VERSION")
        );
        Ok(Self { dir: dir.to_path_buf(), format, header })
    }

    pub fn header(&self) -> &str {
        &self.header
    }

    pub fn write(&self, table: &Table) -> anyhow::Result<PathBuf> {
        let path = match self.format {
            Format::Table => self.dir.join(format!("{}.csv", table.name)),
            Format::JsonLines => self.dir.join(format!("{}.jsonl", table.name)),
        };
        let bytes = match self.format {
            Format::Table => self.csv_bytes(table)?,
            Format::JsonLines => self.jsonl_bytes(table)?,
        };
        fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }

    fn csv_bytes(&self, table: &Table) -> anyhow::Result<Vec<u8>> {
        let mut out = Vec::new();
        writeln!(out, "# {}", self.header)?;
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&table.columns)?;
            for row in &table.rows {
                w.write_record(row.iter().map(Cell::csv))?;
            }
            w.flush()?;
        }
        Ok(out)
    }

    fn jsonl_bytes(&self, table: &Table) -> anyhow::Result<Vec<u8>> {
        let mut out = Vec::new();
        serde_json::to_writer(&mut out, &serde_json::json!({ "header": self.header, "columns": table.columns }))?;
        out.push(b'\n');
        for row in &table.rows {
            let rec: Map<String, Value> = table.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
            serde_json::to_writer(&mut out, &Value::Object(rec))?;
            out.push(b'\n');
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(1e-9), "1e-9");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
        assert_eq!(fmt_f64(0.0), "0");
    }

    #[test]
    fn csv_and_jsonl_layouts() {
        let dir = std::env::temp_dir().join(format!("warpcmc-out-test-{}", std::process::id()));
        let mut t = Table::new("demo", &["x", "label"]);
        t.push(vec![1.5.into(), "a,b".into()]);
        let e = Emitter::new(&dir, Format::Table, "test", "euclidean(n=3)", "8x16").unwrap();
        let text = fs::read_to_string(e.write(&t).unwrap()).unwrap();
        assert!(text.starts_with("# warpcmc "));
        assert!(text.ends_with("x,label\n1.5,\"a,b\"\n"));
        let e = Emitter::new(&dir, Format::JsonLines, "test", "m", "r").unwrap();
        let text = fs::read_to_string(e.write(&t).unwrap()).unwrap();
        let second: Value = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
        assert_eq!(second["label"], "a,b");
        fs::remove_dir_all(&dir).ok();
    }
}
