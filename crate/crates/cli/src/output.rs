//! Records and their json, csv and text renderings.

use std::io::Write;

use clap::ValueEnum;
use serde_json::{json, Map, Value as Json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    List(Vec<u64>),
    Null,
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::Int(v as i64)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl From<Vec<u64>> for Value {
    fn from(v: Vec<u64>) -> Self {
        Value::List(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

/// Ordered field list; every record of a report has the same keys.
#[derive(Debug, Clone, Default)]
pub struct Record(Vec<(&'static str, Value)>);

impl Record {
    pub fn new() -> Self {
        Record(Vec::new())
    }

    pub fn with(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.0.push((key, value.into()));
        self
    }

    fn keys(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.0.iter().map(|(k, _)| *k)
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub records: Vec<Record>,
    /// Free-form annotations, shown in json and text only.
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &'static str, records: Vec<Record>) -> Self {
        Report {
            command,
            records,
            notes: Vec::new(),
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn render(&self, format: Format, digits: usize, out: &mut impl Write) -> std::io::Result<()> {
        match format {
            Format::Json => self.json(out),
            Format::Csv => self.csv(digits, out),
            Format::Text => self.text(digits, out),
        }
    }

    fn json(&self, out: &mut impl Write) -> std::io::Result<()> {
        let records: Vec<Json> = self
            .records
            .iter()
            .map(|r| {
                let mut obj = Map::new();
                for (k, v) in &r.0 {
                    obj.insert(k.to_string(), to_json(v));
                }
                Json::Object(obj)
            })
            .collect();
        let doc = json!({
            "command": self.command,
            "records": records,
            "notes": self.notes,
        });
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)
    }

    fn csv(&self, digits: usize, out: &mut impl Write) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if let Some(first) = self.records.first() {
            w.write_record(first.keys())?;
        }
        for r in &self.records {
            w.write_record(r.0.iter().map(|(_, v)| render(v, digits)))?;
        }
        w.flush()
    }

    fn text(&self, digits: usize, out: &mut impl Write) -> std::io::Result<()> {
        match self.records.as_slice() {
            [] => {}
            [single] => {
                let width = single.keys().map(str::len).max().unwrap_or(0);
                for (k, v) in &single.0 {
                    writeln!(out, "{k:<width$}  {}", render(v, digits))?;
                }
            }
            many => {
                let header: Vec<&str> = many[0].keys().collect();
                let cells: Vec<Vec<String>> = many
                    .iter()
                    .map(|r| r.0.iter().map(|(_, v)| render(v, digits)).collect())
                    .collect();
                let widths: Vec<usize> = (0..header.len())
                    .map(|i| cells.iter().map(|row| row[i].len()).chain([header[i].len()]).max().unwrap_or(0))
                    .collect();
                let line = |row: Vec<&str>| {
                    row.iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:>w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                };
                writeln!(out, "{}", line(header.clone()))?;
                for row in &cells {
                    writeln!(out, "{}", line(row.iter().map(String::as_str).collect()))?;
                }
            }
        }
        for n in &self.notes {
            writeln!(out, "note: {n}")?;
        }
        Ok(())
    }
}

fn to_json(v: &Value) -> Json {
    match v {
        Value::Int(i) => json!(i),
        // Non-finite values have no json literal.
        Value::Float(x) if x.is_finite() => json!(x),
        Value::Float(_) | Value::Null => Json::Null,
        Value::Bool(b) => json!(b),
        Value::Str(s) => json!(s),
        Value::List(xs) => json!(xs),
    }
}

fn render(v: &Value, digits: usize) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Float(x) => significant(*x, digits),
        Value::Bool(b) => b.to_string(),
        Value::Str(s) => s.clone(),
        Value::List(xs) => xs.iter().map(u64::to_string).collect::<Vec<_>>().join(" "),
        Value::Null => String::new(),
    }
}

/// `x` to `digits` significant digits, `%g` style.
pub fn significant(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    // Exponent after rounding, so 9.9999999 goes to 10 rather than 10.0000.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{exp}", trim(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
