//! JSON and CSV rendering.
//!
//! Floats are written as `{:.16e}` (17 significant digits) in both formats.
//! Non-finite floats become `null` in JSON and `inf`/`NaN` in CSV.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::{Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Floats(Vec<f64>),
    Ints(Vec<u64>),
    Null,
    /// Nested data; JSON only.
    Json(Value),
}

pub type Record = Vec<(&'static str, Cell)>;

/// `{:.16e}` with an explicit exponent sign, e.g. `1.5000000000000000e+0`.
pub fn format_float(x: f64) -> String {
    let text = format!("{x:.16e}");
    match text.split_once('e') {
        Some((mantissa, exp)) if !exp.starts_with('-') => format!("{mantissa}e+{exp}"),
        _ => text,
    }
}

pub fn json_float(x: f64) -> Value {
    Value::from(x)
}

/// Pretty JSON whose floats use [`format_float`].
struct FloatFormatter(PrettyFormatter<'static>);

impl Formatter for FloatFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_float(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty-printed JSON with 17-digit floats and a trailing newline.
pub fn to_json_text(value: &impl Serialize) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FloatFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("JSON values serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON output is UTF-8")
}

impl Cell {
    fn to_json(&self) -> Value {
        match self {
            Cell::Int(n) => Value::from(*n),
            Cell::Float(x) => json_float(*x),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Floats(xs) => Value::Array(xs.iter().map(|&x| json_float(x)).collect()),
            Cell::Ints(ns) => Value::Array(ns.iter().map(|&n| Value::from(n)).collect()),
            Cell::Null => Value::Null,
            Cell::Json(v) => v.clone(),
        }
    }

    fn to_csv(&self) -> Option<String> {
        let join = |parts: Vec<String>| parts.join(";");
        match self {
            Cell::Int(n) => Some(n.to_string()),
            Cell::Float(x) => Some(format_float(*x)),
            Cell::Bool(b) => Some(b.to_string()),
            Cell::Floats(xs) => Some(join(xs.iter().map(|&x| format_float(x)).collect())),
            Cell::Ints(ns) => Some(join(ns.iter().map(u64::to_string).collect())),
            Cell::Null => Some(String::new()),
            Cell::Json(_) => None,
        }
    }
}

/// Rows from one command plus summary values.
///
/// A single-row document without summaries renders as a bare JSON object;
/// otherwise as `{"rows": [...], <summary>...}`. In CSV the summaries become
/// footer lines `key,value` padded to the header width.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub rows: Vec<Record>,
    pub summary: Record,
    pub single: bool,
}

fn object(record: &Record) -> Value {
    Value::Object(record.iter().map(|(k, c)| ((*k).to_owned(), c.to_json())).collect::<Map<_, _>>())
}

impl Document {
    pub fn new(rows: Vec<Record>, single: bool) -> Self {
        Document { rows, summary: Vec::new(), single }
    }

    pub fn with_summary(mut self, key: &'static str, cell: Cell) -> Self {
        self.summary.push((key, cell));
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.json(),
            Format::Csv => self.csv(),
        }
    }

    pub fn json(&self) -> String {
        let value = if self.single && self.summary.is_empty() && self.rows.len() == 1 {
            object(&self.rows[0])
        } else {
            let mut map = Map::new();
            map.insert("rows".into(), Value::Array(self.rows.iter().map(object).collect()));
            for (k, c) in &self.summary {
                map.insert((*k).to_owned(), c.to_json());
            }
            Value::Object(map)
        };
        to_json_text(&value)
    }

    pub fn csv(&self) -> String {
        let Some(first) = self.rows.first() else {
            return String::new();
        };
        let columns: Vec<&str> = first.iter().filter(|(_, c)| c.to_csv().is_some()).map(|(k, _)| *k).collect();
        let mut lines = vec![columns.join(",")];
        for row in &self.rows {
            lines.push(row.iter().filter_map(|(_, c)| c.to_csv()).collect::<Vec<_>>().join(","));
        }
        for (k, c) in &self.summary {
            let Some(v) = c.to_csv() else { continue };
            let mut cells = vec![(*k).to_owned(), v];
            cells.resize(columns.len().max(2), String::new());
            lines.push(cells.join(","));
        }
        let mut text = lines.join("\n");
        text.push('\n');
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(to_json_text(&json_float(0.1)), "1.0000000000000001e-1\n");
        assert_eq!(to_json_text(&vec![1.0, f64::NAN]), "[\n  1.0000000000000000e+0,\n  null\n]\n");
        assert_eq!(json_float(f64::INFINITY), Value::Null);
        let back: f64 = format_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn csv_footer_is_padded() {
        let rows = vec![vec![("r", Cell::Float(20.0)), ("count", Cell::Int(3)), ("x", Cell::Json(Value::Null))]];
        let doc = Document::new(rows, false).with_summary("exponent", Cell::Float(-0.5));
        let csv = doc.csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "r,count");
        assert_eq!(lines[1], "2.0000000000000000e+1,3");
        assert_eq!(lines[2], "exponent,-5.0000000000000000e-1");
    }

    #[test]
    fn single_row_is_bare_object() {
        let doc = Document::new(vec![vec![("positive", Cell::Int(15))]], true);
        let v: Value = serde_json::from_str(&doc.json()).unwrap();
        assert_eq!(v["positive"], 15);
        let multi = Document::new(vec![vec![("positive", Cell::Int(15))]], false);
        let v: Value = serde_json::from_str(&multi.json()).unwrap();
        assert_eq!(v["rows"][0]["positive"], 15);
    }
}
