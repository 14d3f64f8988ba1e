//! Tables with run metadata, rendered as CSV or JSON.
//!
//! Floats are always written in scientific notation with 17 significant
//! digits so that a rerun produces the same bytes and every double
//! round-trips exactly.

use std::fmt::Write as _;

use serde_json::{Map, Number, Value as Json};

/// A scalar or list stored in a metadata entry or table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    List(Vec<Value>),
}

impl From<i64> for Value {
    fn from(x: i64) -> Self {
        Value::Int(x)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u32> for Value {
    fn from(x: u32) -> Self {
        Value::Int(x as i64)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Bool(x)
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

impl<T: Into<Value>> From<Vec<T>> for Value {
    fn from(xs: Vec<T>) -> Self {
        Value::List(xs.into_iter().map(Into::into).collect())
    }
}

/// `x` with 17 significant digits, e.g. `1.0000000000000000e-1`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // no negative zero in output
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Int(x) => x.to_string(),
            Value::Float(x) => format_float(*x),
            Value::Text(s) => s.clone(),
            Value::Bool(b) => b.to_string(),
            Value::List(xs) => xs.iter().map(Value::csv).collect::<Vec<_>>().join(";"),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Int(x) => Json::from(*x),
            Value::Float(x) if x.is_finite() => Json::Number(
                format_float(*x)
                    .parse::<Number>()
                    .expect("formatted float is a JSON number"),
            ),
            Value::Float(_) => Json::Null,
            Value::Text(s) => Json::String(s.clone()),
            Value::Bool(b) => Json::Bool(*b),
            Value::List(xs) => Json::Array(xs.iter().map(Value::json).collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Output of one command: the resolved run parameters, derived summary
/// values and a rectangular table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub run: Vec<(String, Value)>,
    pub summary: Vec<(String, Value)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Document {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            ..Self::default()
        }
    }

    pub fn summary(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.summary.push((key.into(), value.into()));
    }

    pub fn push_row(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# program={} {}", crate::PROGRAM, crate::VERSION).unwrap();
        for (k, v) in &self.run {
            writeln!(out, "# run.{k}={}", v.csv()).unwrap();
        }
        for (k, v) in &self.summary {
            writeln!(out, "# summary.{k}={}", v.csv()).unwrap();
        }
        writeln!(out, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::csv).collect();
            writeln!(out, "{}", cells.join(",")).unwrap();
        }
        out
    }

    fn to_json(&self) -> String {
        let section = |entries: &[(String, Value)]| -> Json {
            Json::Object(
                entries
                    .iter()
                    .map(|(k, v)| (k.clone(), v.json()))
                    .collect::<Map<_, _>>(),
            )
        };
        let mut doc = Map::new();
        doc.insert("program".into(), Json::from(crate::PROGRAM));
        doc.insert("version".into(), Json::from(crate::VERSION));
        doc.insert("run".into(), section(&self.run));
        doc.insert("summary".into(), section(&self.summary));
        doc.insert("columns".into(), Json::from(self.columns.clone()));
        doc.insert(
            "rows".into(),
            Json::Array(
                self.rows
                    .iter()
                    .map(|r| Json::Array(r.iter().map(Value::json).collect()))
                    .collect(),
            ),
        );
        let mut text = serde_json::to_string_pretty(&Json::Object(doc)).expect("JSON values serialize");
        text.push('\n');
        text
    }
}
