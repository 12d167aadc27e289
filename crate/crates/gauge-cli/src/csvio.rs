//! CSV persistence with a fixed numeric format: every value is written
//! in scientific notation with 12 significant digits, the header names
//! every column, and re-reading a file we wrote and writing it again
//! reproduces the bytes. Empty cells encode "absent" (used for onset
//! tables where a gamma produced no onset).

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// 12 significant digits, scientific notation.
pub fn fmt_value(x: f64) -> String {
    format!("{x:.11e}")
}

/// An all-numeric table with named columns and optional (absent) cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new(headers: Vec<String>) -> Self {
        Table { headers, rows: Vec::new() }
    }

    pub fn push_row(&mut self, row: Vec<Option<f64>>) -> CliResult<()> {
        if row.len() != self.headers.len() {
            return Err(CliError::Usage(format!(
                "row with {} cells does not match the {} header columns",
                row.len(),
                self.headers.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> CliResult<usize> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Usage(format!(
                "no column '{name}' in table with columns [{}]",
                self.headers.join(", ")
            ))
        })
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut out = String::new();
        out.push_str(&self.headers.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> =
                row.iter().map(|c| c.map(fmt_value).unwrap_or_default()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        let mut file = fs::File::create(path).map_err(|e| {
            CliError::Usage(format!("cannot write '{}': {e}", path.display()))
        })?;
        file.write_all(out.as_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> CliResult<Table> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Usage(format!("cannot read '{}': {e}", path.display()))
        })?;
        let mut lines = text.lines();
        let header_line = lines.next().ok_or_else(|| {
            CliError::Usage(format!("'{}' is empty, expected a CSV header", path.display()))
        })?;
        let headers: Vec<String> = header_line.split(',').map(|h| h.trim().to_string()).collect();
        let mut table = Table::new(headers);
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut row = Vec::with_capacity(table.headers.len());
            for cell in line.split(',') {
                let cell = cell.trim();
                if cell.is_empty() {
                    row.push(None);
                } else {
                    let v: f64 = cell.parse().map_err(|_| {
                        CliError::Usage(format!(
                            "'{}' line {}: cannot parse '{cell}' as a number",
                            path.display(),
                            lineno + 2
                        ))
                    })?;
                    row.push(Some(v));
                }
            }
            table.push_row(row)?;
        }
        Ok(table)
    }
}

/// Write a fit report next to the CSV (same stem, `.fit.txt` extension)
/// and mirror it to standard output. Returns the sidecar path.
pub fn emit_report(csv_path: &Path, lines: &[String]) -> CliResult<PathBuf> {
    let mut sidecar = csv_path.to_path_buf();
    sidecar.set_extension("fit.txt");
    let mut text = String::new();
    for line in lines {
        println!("{line}");
        text.push_str(line);
        text.push('\n');
    }
    fs::write(&sidecar, text).map_err(|e| {
        CliError::Usage(format!("cannot write '{}': {e}", sidecar.display()))
    })?;
    Ok(sidecar)
}

/// Compact label for file suffixes and column names: plain decimal
/// (`2.2`, `20`), stable across runs.
pub fn fmt_label(x: f64) -> String {
    format!("{x}")
}
