//! Schema-stable writers. Every real number leaves the program rounded to
//! twelve significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::config::Format;
use crate::error::CliError;

pub const OUTPUT_VERSION: u32 = 1;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn format_number(x: f64) -> String {
    format!("{}", round_sig(x))
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| Number::from_f64(round_sig(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

pub fn to_rounded_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Io(e.to_string()))?;
    serde_json::to_string(&round_value(v)).map_err(|e| CliError::Io(e.to_string()))
}

pub fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

pub fn io_error(e: io::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// A titled table with a fixed column order.
pub struct Table {
    pub kind: String,
    pub params: Map<String, Value>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::JsonLines => self.write_json_lines(out),
        }
        .map_err(io_error)?;
        out.flush().map_err(io_error)
    }

    fn write_csv(&self, out: &mut dyn Write) -> io::Result<()> {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={}", round_value(v.clone())))
            .collect();
        write!(out, "# eavesdrop curves version={OUTPUT_VERSION} kind={}", self.kind)?;
        for p in params {
            write!(out, " {p}")?;
        }
        writeln!(out)?;
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_number(x)).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    fn write_json_lines(&self, out: &mut dyn Write) -> io::Result<()> {
        let mut header = Map::new();
        header.insert("type".into(), "header".into());
        header.insert("version".into(), OUTPUT_VERSION.into());
        header.insert("kind".into(), self.kind.clone().into());
        header.insert("columns".into(), self.columns.clone().into());
        header.insert("params".into(), round_value(Value::Object(self.params.clone())));
        writeln!(out, "{}", Value::Object(header))?;
        for row in &self.rows {
            let mut obj = Map::new();
            for (name, &x) in self.columns.iter().zip(row) {
                obj.insert(name.clone(), Number::from_f64(round_sig(x)).map_or(Value::Null, Value::Number));
            }
            writeln!(out, "{}", Value::Object(obj))?;
        }
        Ok(())
    }
}
