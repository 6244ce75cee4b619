//! Report model shared by every subcommand: a named experiment, its
//! parameters, a column header, and typed rows. CSV is the primary
//! format (floats at six decimals, counts exact); JSON mirrors it with
//! exact rationals as numerator/denominator string pairs.

use num::BigUint;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone)]
pub enum Cell {
    Uint(u64),
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    /// Exact integer that may exceed 2^53; rendered as a decimal string
    /// in JSON so no precision is lost.
    Count(BigUint),
    /// Exact rational, already reduced.
    Ratio {
        num: String,
        den: String,
    },
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Uint(v) => v.to_string(),
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.6}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Count(c) => c.to_string(),
            Cell::Ratio { num, den } => format!("{num}/{den}"),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Uint(v) => json!(v),
            Cell::Int(v) => json!(v),
            // NaN / infinities have no JSON number form; they become null.
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Count(c) => json!(c.to_string()),
            Cell::Ratio { num, den } => json!({ "num": num, "den": den }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
pub struct Report {
    pub experiment: &'static str,
    /// Sorted-key parameter map; values are strings or numbers.
    pub params: Map<String, Value>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(experiment: &'static str, columns: Vec<&'static str>) -> Self {
        Report {
            experiment,
            params: Map::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let doc = json!({
            "experiment": self.experiment,
            "params": self.params,
            "columns": self.columns,
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("report serialization");
        text.push('\n');
        text
    }
}
