//! Tabular output with a metadata header, written as CSV, JSON or an
//! aligned text table.

use serde_json::{Map, Value};

use crate::config::Format;
use crate::CliError;

/// Significant digits of every printed float.
pub const DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // round through the printed form so JSON and CSV agree
            Cell::Num(x) => fmt_num(*x)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

/// Formats with DIGITS significant digits, fixed point for moderate
/// magnitudes and scientific otherwise, trailing zeros removed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mant, exp) = sci.split_once('e').unwrap_or((&sci, "0"));
    let exp: i32 = exp.parse().unwrap_or(0);
    if (-5..DIGITS as i32).contains(&exp) {
        let decimals = (DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mant.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// One metadata entry; `source` records where a configuration value came
/// from and is absent for derived quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct Meta {
    pub key: String,
    pub value: String,
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Vec<Meta>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { meta: Vec::new(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.meta.push(Meta { key: key.into(), value: value.into(), source: None });
    }

    pub fn meta_num(&mut self, key: impl Into<String>, value: f64) {
        self.meta(key, fmt_num(value));
    }

    pub fn meta_sourced(&mut self, key: impl Into<String>, value: impl Into<String>, source: impl Into<String>) {
        self.meta.push(Meta { key: key.into(), value: value.into(), source: Some(source.into()) });
    }

    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|m| m.key == key).map(|m| m.value.as_str())
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => Ok(self.to_json()),
            Format::Table => Ok(self.to_text()),
        }
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut out = String::new();
        for m in &self.meta {
            out.push_str(&format!("# {} = {}", m.key, m.value));
            if let Some(s) = &m.source {
                out.push_str(&format!(" ({s})"));
            }
            out.push('\n');
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(|e| CliError::Output(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(|e| CliError::Output(e.to_string()))?;
        }
        let body = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| CliError::Output(e.to_string()))?);
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let mut meta = Map::new();
        let mut sources = Map::new();
        for m in &self.meta {
            meta.insert(m.key.clone(), Value::String(m.value.clone()));
            if let Some(s) = &m.source {
                sources.insert(m.key.clone(), Value::String(s.clone()));
            }
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect()))
            .collect();
        let mut root = Map::new();
        root.insert("metadata".into(), Value::Object(meta));
        root.insert("sources".into(), Value::Object(sources));
        root.insert("columns".into(), Value::Array(self.columns.iter().cloned().map(Value::String).collect()));
        root.insert("rows".into(), Value::Array(rows));
        let mut s = serde_json::to_string_pretty(&Value::Object(root)).unwrap_or_default();
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let kw = self.meta.iter().map(|m| m.key.chars().count()).max().unwrap_or(0);
        for m in &self.meta {
            out.push_str(&format!("{:<kw$}  {}", m.key, m.value));
            if let Some(s) = &m.source {
                out.push_str(&format!("  [{s}]"));
            }
            out.push('\n');
        }
        if !self.meta.is_empty() {
            out.push('\n');
        }
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|j| {
                cells.iter().map(|r| r[j].chars().count()).chain([self.columns[j].chars().count()]).max().unwrap_or(0)
            })
            .collect();
        let line = |fields: Vec<&str>| -> String {
            let parts: Vec<String> = fields.iter().zip(&widths).map(|(f, w)| format!("{f:<w$}")).collect();
            parts.join("  ").trim_end().to_string() + "\n"
        };
        out.push_str(&line(self.columns.iter().map(String::as_str).collect()));
        for r in &cells {
            out.push_str(&line(r.iter().map(String::as_str).collect()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0), "2");
        assert_eq!(fmt_num(-1234.5), "-1234.5");
        assert_eq!(fmt_num(1e-7 / 3.0), "3.33333333333e-8");
        assert_eq!(fmt_num(6.02214076e23), "6.02214076e23");
        assert_eq!(fmt_num(123456789012.4), "123456789012");
        assert_eq!(fmt_num(0.0), "0");
    }

    fn sample() -> Table {
        let mut t = Table::new(&["T", "label"]);
        t.meta_sourced("L1", "2", "preset fig4d");
        t.meta_num("T_3D", 0.717);
        t.push(vec![1.0.into(), "one-step".into()]);
        t.push(vec![Cell::Num(0.5), Cell::Empty]);
        t
    }

    #[test]
    fn csv_has_metadata_then_header() {
        let s = sample().to_csv().unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines, ["# L1 = 2 (preset fig4d)", "# T_3D = 0.717", "T,label", "1,one-step", "0.5,"]);
    }

    #[test]
    fn json_mirrors_csv() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["metadata"]["L1"], "2");
        assert_eq!(v["sources"]["L1"], "preset fig4d");
        assert_eq!(v["rows"][0]["label"], "one-step");
        assert_eq!(v["rows"][1]["T"], 0.5);
        assert!(v["rows"][1]["label"].is_null());
    }
}
