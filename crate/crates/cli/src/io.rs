//! CSV ingestion, number formatting and atomic output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{config, CliError, CliResult};

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        ryu::Buffer::new().format_finite(v).to_string()
    }
}

/// JSON number, or a string marker for values JSON cannot carry.
pub fn num(v: f64) -> Value {
    // adding zero folds -0.0 into 0.0
    match serde_json::Number::from_f64(v + 0.0) {
        Some(n) => Value::Number(n),
        None => Value::String(fmt_f64(v)),
    }
}

pub fn opt_num(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

/// A CSV file whose header has been checked against a fixed schema.
pub struct Table {
    path: PathBuf,
    pub rows: Vec<csv::StringRecord>,
}

impl Table {
    pub fn read(path: &Path, columns: &[&str]) -> CliResult<Self> {
        let mut rd = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let header = rd.headers().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?.clone();
        let found: Vec<&str> = header.iter().collect();
        if found != columns {
            return config(format!(
                "{}: expected columns `{}`, found `{}`",
                path.display(),
                columns.join(","),
                found.join(",")
            ));
        }
        let mut rows = Vec::new();
        for rec in rd.records() {
            rows.push(rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?);
        }
        if rows.is_empty() {
            return config(format!("{}: no data rows", path.display()));
        }
        Ok(Self { path: path.to_path_buf(), rows })
    }

    fn cell(&self, row: usize, col: usize) -> &str {
        // the csv reader rejects rows whose length differs from the header
        self.rows[row].get(col).unwrap_or("")
    }

    /// Row number in the file (header is line 1).
    fn line(&self, row: usize) -> usize {
        self.rows[row].position().map_or(row + 2, |p| p.line() as usize)
    }

    pub fn f64(&self, row: usize, col: usize) -> CliResult<f64> {
        let s = self.cell(row, col);
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => config(format!("{}: line {}: `{s}` is not a finite number", self.path.display(), self.line(row))),
        }
    }

    pub fn flag(&self, row: usize, col: usize) -> CliResult<bool> {
        let s = self.cell(row, col);
        match s {
            "1" | "true" | "TRUE" | "True" => Ok(true),
            "0" | "false" | "FALSE" | "False" => Ok(false),
            _ => config(format!("{}: line {}: `{s}` is not a boolean (0/1)", self.path.display(), self.line(row))),
        }
    }

    /// All columns as numbers.
    pub fn numeric(&self) -> CliResult<Vec<Vec<f64>>> {
        (0..self.rows.len())
            .map(|r| (0..self.rows[r].len()).map(|c| self.f64(r, c)).collect())
            .collect()
    }
}

pub fn csv_text(columns: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = columns.join(",");
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_f64).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Writes `contents` to `dir/name` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    let err = |e: std::io::Error| CliError::Output(format!("{}: {e}", dir.join(name).display()));
    fs::create_dir_all(dir).map_err(err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(contents.as_bytes()).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    let path = dir.join(name);
    tmp.persist(&path).map_err(|e| err(e.error))?;
    Ok(path)
}
