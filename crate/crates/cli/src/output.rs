//! Output documents and their CSV / JSON encodings.

use std::io::Write;

use bl_core::{Rational, Scalar};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One table cell. Exact values render as `num/den` strings, floats as
/// shortest round-trip decimals.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Exact(Rational),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Exact(r) => r.render(),
            Cell::Float(f) => f.render(),
            Cell::Text(s) => s.clone(),
        }
    }

    /// In exact documents every non-integer value is a string.
    fn to_json(&self, exact: bool) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Exact(r) => json!(r.render()),
            Cell::Float(f) if exact => json!(f.render()),
            // Non-finite floats have no JSON number form.
            Cell::Float(f) => serde_json::Number::from_f64(*f).map_or(Value::Null, Value::Number),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Scalars that can be placed in a table.
pub trait IntoCell {
    fn cell(self) -> Cell;
}

impl IntoCell for Rational {
    fn cell(self) -> Cell {
        Cell::Exact(self)
    }
}

impl IntoCell for f64 {
    fn cell(self) -> Cell {
        Cell::Float(self)
    }
}

#[derive(Debug, Clone)]
pub enum Data {
    Table {
        columns: Vec<&'static str>,
        rows: Vec<Vec<Cell>>,
    },
    /// Square matrix with state labels on both axes.
    Matrix {
        labels: Vec<usize>,
        rows: Vec<Vec<Cell>>,
    },
    /// A JSON object for `--format json`, with a flat table as its CSV form.
    Report { object: Value, table: Box<Data> },
}

#[derive(Debug, Clone)]
pub struct Document {
    pub command: &'static str,
    pub backend: &'static str,
    pub params: Value,
    pub data: Data,
}

impl Document {
    pub fn write(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Csv => write_csv(&self.data, out),
            Format::Json => {
                let doc = json!({
                    "command": self.command,
                    "backend": self.backend,
                    "params": self.params,
                    "data": data_json(&self.data, self.backend == "exact"),
                });
                serde_json::to_writer_pretty(&mut *out, &doc)?;
                writeln!(out)
            }
        }
    }
}

fn data_json(data: &Data, exact: bool) -> Value {
    match data {
        Data::Table { columns, rows } => Value::Array(
            rows.iter()
                .map(|row| {
                    let obj: Map<String, Value> = columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), v.to_json(exact)))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        ),
        Data::Matrix { rows, .. } => Value::Array(
            rows.iter()
                .map(|r| Value::Array(r.iter().map(|c| c.to_json(exact)).collect()))
                .collect(),
        ),
        Data::Report { object, .. } => object.clone(),
    }
}

fn write_csv(data: &Data, out: &mut dyn Write) -> std::io::Result<()> {
    if let Data::Report { table, .. } = data {
        return write_csv(table, out);
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    match data {
        Data::Table { columns, rows } => {
            w.write_record(columns)?;
            for row in rows {
                w.write_record(row.iter().map(Cell::render))?;
            }
        }
        Data::Matrix { labels, rows } => {
            let header =
                std::iter::once("i".to_string()).chain(labels.iter().map(usize::to_string));
            w.write_record(header)?;
            for (label, row) in labels.iter().zip(rows) {
                w.write_record(
                    std::iter::once(label.to_string()).chain(row.iter().map(Cell::render)),
                )?;
            }
        }
        Data::Report { .. } => unreachable!("handled above"),
    }
    w.flush()
}
