//! CSV and JSON writers.
//!
//! CSV files start with a `# <schema>` comment line, then a header row.
//! Floats are written with 17 significant digits; missing values are empty.

use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub enum Field<'a> {
    Text(&'a str),
    Int(u64),
    Float(Option<f64>),
    Bool(Option<bool>),
}

impl Field<'_> {
    fn render(&self) -> String {
        match self {
            Field::Text(s) => s.to_string(),
            Field::Int(i) => i.to_string(),
            Field::Float(Some(x)) => format_float(*x),
            Field::Float(None) | Field::Bool(None) => String::new(),
            Field::Bool(Some(b)) => b.to_string(),
        }
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub trait CsvRecord {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<Field<'_>>;
}

pub fn write_csv<R: CsvRecord, W: Write>(rows: &[R], schema: &str, out: W) -> CliResult<()> {
    let mut out = out;
    writeln!(out, "# {schema}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(R::HEADER)?;
    for r in rows {
        w.write_record(r.fields().iter().map(Field::render))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string<R: CsvRecord>(rows: &[R], schema: &str) -> String {
    let mut buf = Vec::new();
    write_csv(rows, schema, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, out: W) -> CliResult<()> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Input(format!("json error: {e}")))?;
    writeln!(out)?;
    Ok(())
}

/// Writes rows in the chosen format to `path`, or to stdout without one.
pub fn emit<R: CsvRecord + Serialize>(rows: &[R], schema: &str, format: Format, path: Option<&Path>) -> CliResult<()> {
    let mut sink: Box<dyn Write> = match path {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p).map_err(|e| {
            CliError::Input(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(std::io::stdout().lock()),
    };
    match format {
        Format::Csv => write_csv(rows, schema, &mut sink)?,
        Format::Json => write_json(rows, &mut sink)?,
    }
    sink.flush()?;
    Ok(())
}

/// Parses a file written by [`write_csv`], checking its schema line.
pub fn read_csv<R: DeserializeOwned>(text: &str, schema: &str) -> CliResult<Vec<R>> {
    let first = text.lines().next().unwrap_or("");
    if first != format!("# {schema}") {
        return Err(CliError::Input(format!("expected schema line '# {schema}', found '{first}'")));
    }
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(CliError::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        for x in [0.1, 1.0 / 3.0, 6.02e23, -2.5e-300, 0.0] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(f64::NAN), "NaN");
    }
}
