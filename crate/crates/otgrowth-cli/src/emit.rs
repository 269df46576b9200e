//! Deterministic report emission.
//!
//! CSV files are assembled in memory and written in one call: UTF-8, comma
//! separated, one header row, `\n` line endings, and every float printed as
//! `{:.16e}` (17 significant digits — exact round trip for f64). Identical
//! inputs therefore produce byte-identical files, which the determinism
//! acceptance check compares directly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Canonical float formatting: 17 significant digits, scientific notation.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    /// Float, printed via [`fmt_float`].
    F(f64),
    /// Unsigned integer.
    U(u64),
    /// Bare string literal (must not contain commas, quotes, or newlines).
    S(&'static str),
    /// Owned string (same character restrictions).
    Text(String),
    /// Empty cell (e.g. a degenerate published bound).
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::F(v) => fmt_float(*v),
            Cell::U(v) => v.to_string(),
            Cell::S(s) => {
                debug_assert!(!s.contains([',', '"', '\n']));
                (*s).to_string()
            }
            Cell::Text(s) => {
                debug_assert!(!s.contains([',', '"', '\n']));
                s.clone()
            }
            Cell::Empty => String::new(),
        }
    }
}

/// In-memory CSV table with a fixed header.
pub struct CsvTable {
    columns: usize,
    buf: String,
}

impl CsvTable {
    /// Start a table with the given header row.
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        CsvTable { columns: header.len(), buf }
    }

    /// Append one row; the cell count must match the header.
    pub fn row(&mut self, cells: &[Cell]) {
        assert_eq!(cells.len(), self.columns, "CSV row width mismatch");
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            self.buf.push_str(&cell.render());
        }
        self.buf.push('\n');
    }

    /// Write the table to `path`.
    pub fn write_to(&self, path: &Path) -> Result<(), CliError> {
        write_bytes(path, self.buf.as_bytes())
    }
}

/// Serialize `value` as pretty JSON (struct field order, so deterministic)
/// with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Io(format!("JSON serialization failed: {e}")))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::Io(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    fs::write(path, bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Resolve an output name against the run's output directory.
pub fn resolve_output(out_dir: &Path, name: &str) -> PathBuf {
    let name_path = Path::new(name);
    if name_path.is_absolute() {
        name_path.to_path_buf()
    } else {
        out_dir.join(name_path)
    }
}
