//! Plot-ready tabular output (CSV or JSON lines) with fixed numeric formatting.

use std::io::Write;

use serde_json::{Map, Value};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Format a float with 12 significant digits. Non-finite values are written
/// as `nan`, `inf`, `-inf`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{:.11e}", x);
    // trim trailing zeros of the mantissa: 1.50000000000e0 -> 1.5e0
    let (mant, exp) = s.split_once('e').expect("exponent");
    let mant = if mant.contains('.') {
        mant.trim_end_matches('0').trim_end_matches('.')
    } else {
        mant
    };
    let e: i32 = exp.parse().expect("exponent digits");
    if (-5..12).contains(&e) {
        // plain decimal is easier on spreadsheets
        let digits = (11 - e).max(0) as usize;
        let plain = format!("{:.*}", digits, x);
        if plain.contains('.') {
            plain.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            plain
        }
    } else {
        format!("{mant}e{e}")
    }
}

/// Column-typed cell so JSON output keeps numbers as numbers.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(i64),
    Bool(bool),
    Empty,
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(x) => num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Num(x) if x.is_finite() => {
                // round-trip through the 12-digit text so CSV and JSON agree
                let v: f64 = num(*x).parse().expect("formatted float");
                serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
            }
            Cell::Num(x) => Value::String(num(*x)),
            Cell::Int(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
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

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<i32> for Cell {
    fn from(i: i32) -> Self {
        Cell::Int(i as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, w: W, format: Format) -> Result<()> {
        match format {
            Format::Csv => self.write_csv(w),
            Format::Json => self.write_jsonl(w),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.header)?;
        for row in &self.rows {
            wr.write_record(row.iter().map(Cell::to_csv))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for row in &self.rows {
            let obj: Map<String, Value> = self
                .header
                .iter()
                .cloned()
                .zip(row.iter().map(Cell::to_json))
                .collect();
            serde_json::to_writer(&mut w, &Value::Object(obj)).map_err(|e| crate::Error::Io(e.to_string()))?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_string(&self, format: Format) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf, format).expect("in-memory write");
        String::from_utf8(buf).expect("utf-8 table")
    }
}
