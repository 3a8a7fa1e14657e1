//! Table emission as CSV with `#` provenance lines, or as JSON
//! `{config, rows}`.

use std::collections::BTreeMap;
use std::io::{self, Write};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub version: &'static str,
    pub seed: Option<u64>,
    pub t: Option<u32>,
    pub params: BTreeMap<String, Value>,
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: &str, format: Format) -> Self {
        RunConfig {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            seed: None,
            t: None,
            params: BTreeMap::new(),
            format,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Missing,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Shortest decimal that parses back to the same double.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else if v == 0.0 || (1e-4..1e16).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(v) => Value::String(format_f64(*v)),
            Cell::Int(v) => json!(v),
            Cell::Bool(b) => json!(b),
            Cell::Missing => Value::Null,
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn write_table<W: Write>(out: &mut W, config: &RunConfig, table: &Table) -> io::Result<()> {
    match config.format {
        Format::Csv => write_csv(out, config, table),
        Format::Json => write_json(out, config, table),
    }
}

fn write_csv<W: Write>(out: &mut W, config: &RunConfig, table: &Table) -> io::Result<()> {
    writeln!(out, "# stabilis {}", config.version)?;
    writeln!(out, "# command: {}", config.command)?;
    if let Some(seed) = config.seed {
        writeln!(out, "# seed: {seed}")?;
    }
    if let Some(t) = config.t {
        writeln!(out, "# t: {t}")?;
    }
    writeln!(out, "# config: {}", serde_json::to_string(config)?)?;
    writeln!(out, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::csv).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

fn write_json<W: Write>(out: &mut W, config: &RunConfig, table: &Table) -> io::Result<()> {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = table
                .columns
                .iter()
                .zip(row)
                .map(|(c, v)| (c.to_string(), v.json()))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let doc = json!({ "config": config, "rows": rows });
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip() {
        for v in [0.1, 1e-8, 53.0, 2f64.sqrt(), 1e300, -4.5e-20, 0.0] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_f64(f64::INFINITY), "inf");
        assert_eq!(format_f64(1e-8), "1e-8");
    }

    #[test]
    fn csv_quotes_commas() {
        assert_eq!(Cell::from("1,2").csv(), "\"1,2\"");
    }
}
