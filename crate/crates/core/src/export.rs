//! CSV and JSON persistence.
//!
//! Floats are written with Rust's `Display`, which is the shortest decimal
//! that parses back to the same `f64`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::{Row, RunRecord, CSV_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Picks the format from the file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.into(), source }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io { path: path.into(), source },
            _ => unreachable!(),
        }
    } else {
        Error::Parse { path: path.into(), message: e.to_string() }
    }
}

pub fn write_csv<W: Write>(rec: &RunRecord, out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in &rec.rows {
        w.write_record(row.values().iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rec: &RunRecord) -> String {
    let mut buf = Vec::new();
    write_csv(rec, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

/// Parses a CSV produced by [`write_csv`]. The header must match exactly.
pub fn read_csv_str(text: &str) -> std::result::Result<RunRecord, String> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err("CSV header does not match the run-record schema".into());
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let mut v = [0.0; 19];
        for (slot, field) in v.iter_mut().zip(rec.iter()) {
            *slot = field.parse().map_err(|e| format!("row {}: {field:?}: {e}", line + 1))?;
        }
        rows.push(Row::from_values(&v));
    }
    Ok(RunRecord { rows, ..Default::default() })
}

pub fn read_csv(path: &Path) -> Result<RunRecord> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    read_csv_str(&text).map_err(|message| Error::Parse { path: path.into(), message })
}

/// Writes any serializable value as pretty JSON.
pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| match e.io_error_kind() {
        Some(kind) => Error::Io { path: path.into(), source: kind.into() },
        None => Error::Parse { path: path.into(), message: e.to_string() },
    })?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(io_err(path))
}

/// Writes a run record in the given format.
pub fn export_record(rec: &RunRecord, path: &Path, format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let file = File::create(path).map_err(io_err(path))?;
            write_csv(rec, BufWriter::new(file)).map_err(|e| csv_err(path, e))
        }
        Format::Json => write_json(&rec.rows, path),
    }
}
