//! Flat tables written as CSV or JSON and read back from either.

use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde_json::{Map, Value};

use crate::config::OutputFormat;

/// Significant digits written for every number.
const SIG_DIGITS: i32 = 15;

/// Fixed-point rendering with at least [`SIG_DIGITS`] significant digits.
/// Rust's float formatting is locale-free.
pub fn fixed(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", (SIG_DIGITS - 1) as usize, 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (SIG_DIGITS - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fixed(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }

    fn from_json(v: &Value) -> Self {
        match v {
            Value::Null => Cell::Empty,
            Value::Bool(b) => Cell::Bool(*b),
            Value::Number(n) => n.as_i64().map_or_else(|| Cell::Num(n.as_f64().unwrap_or(f64::NAN)), Cell::Int),
            Value::String(s) => Cell::Text(s.clone()),
            other => Cell::Text(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(headers: &[S]) -> Self {
        Self { headers: headers.iter().map(|h| h.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn write(&self, path: &Path, format: OutputFormat) -> Result<()> {
        let out = match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.headers)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::render))?;
                }
                w.into_inner().map_err(|e| e.into_error())?
            }
            OutputFormat::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|row| {
                        let obj: Map<String, Value> =
                            self.headers.iter().cloned().zip(row.iter().map(Cell::to_json)).collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut s = serde_json::to_vec_pretty(&rows)?;
                s.push(b'\n');
                s
            }
        };
        fs::write(path, out).with_context(|| format!("writing {}", path.display()))
    }

    /// Reads a table written by [`Table::write`]; `.json` files as JSON,
    /// anything else as CSV.
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let table = if is_json { Self::parse_json(&bytes) } else { Self::parse_csv(&bytes) }
            .with_context(|| format!("parsing {}", path.display()))?;
        ensure!(!table.rows.is_empty(), "{} contains no rows", path.display());
        Ok(table)
    }

    fn parse_csv(bytes: &[u8]) -> Result<Self> {
        let mut r = csv::Reader::from_reader(bytes);
        let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut table = Table { headers, rows: Vec::new() };
        for rec in r.records() {
            let rec = rec?;
            table.rows.push(rec.iter().map(|s| if s.is_empty() { Cell::Empty } else { Cell::text(s) }).collect());
        }
        Ok(table)
    }

    fn parse_json(bytes: &[u8]) -> Result<Self> {
        let Value::Array(items) = serde_json::from_slice(bytes)? else {
            bail!("expected a JSON array of row objects");
        };
        let mut table = Table::default();
        for item in &items {
            let Value::Object(obj) = item else {
                bail!("expected a JSON array of row objects");
            };
            if table.headers.is_empty() {
                table.headers = obj.keys().cloned().collect();
            }
            table.rows.push(table.headers.iter().map(|h| obj.get(h).map_or(Cell::Empty, Cell::from_json)).collect());
        }
        Ok(table)
    }
}

/// Typed access to one row of a read-back table.
pub struct RowView<'a> {
    pub table: &'a Table,
    pub index: usize,
}

impl RowView<'_> {
    fn cell(&self, name: &str) -> Result<&Cell> {
        let col = self.table.column(name).with_context(|| format!("missing column `{name}`"))?;
        self.table.rows[self.index].get(col).with_context(|| format!("row {} is short", self.index + 1))
    }

    pub fn num(&self, name: &str) -> Result<f64> {
        match self.cell(name)? {
            Cell::Num(x) => Ok(*x),
            Cell::Int(i) => Ok(*i as f64),
            Cell::Text(s) => s
                .trim()
                .parse()
                .with_context(|| format!("row {}: `{name}` = `{s}` is not a number", self.index + 1)),
            _ => bail!("row {}: `{name}` is empty", self.index + 1),
        }
    }

    pub fn text(&self, name: &str) -> Result<String> {
        Ok(match self.cell(name)? {
            Cell::Empty => String::new(),
            c => c.render(),
        })
    }
}
