//! Output formatting and destination handling.
//!
//! Tabular cells carry 12 significant digits in scientific notation; JSON
//! numbers are rounded to the same precision so both formats are
//! byte-reproducible. Undefined concurrences become empty CSV cells and JSON
//! nulls.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Environment variable holding the default directory for relative output paths.
pub const OUT_DIR_VAR: &str = "STROBOSIM_OUT_DIR";

/// Formats with 12 significant digits (regression-stable).
pub fn sig(value: f64) -> String {
    format!("{value:.11e}")
}

/// Same value rounded to the printed precision, as a JSON number.
pub fn sig_json(value: f64) -> serde_json::Value {
    let rounded: f64 = sig(value).parse().expect("scientific notation roundtrip");
    serde_json::Value::from(rounded)
}

/// Optional concurrence as a CSV cell.
pub fn cell(value: Option<f64>) -> String {
    value.map(sig).unwrap_or_default()
}

/// Optional concurrence as a JSON value.
pub fn cell_json(value: Option<f64>) -> serde_json::Value {
    value.map(sig_json).unwrap_or(serde_json::Value::Null)
}

/// Output format selector.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        match text {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::usage(format!(
                "format must be csv or json, got {other:?}"
            ))),
        }
    }
}

fn resolve_path(path: &str) -> PathBuf {
    let raw = Path::new(path);
    if raw.is_relative() {
        if let Ok(dir) = std::env::var(OUT_DIR_VAR) {
            if !dir.is_empty() {
                return Path::new(&dir).join(raw);
            }
        }
    }
    raw.to_path_buf()
}

/// Writes `content` to the configured destination (stdout when no path).
pub fn emit(output: Option<&str>, content: &str) -> Result<(), CliError> {
    match output {
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
        Some(path) => {
            let resolved = resolve_path(path);
            std::fs::write(&resolved, content).map_err(|e| {
                CliError::usage(format!("cannot write {}: {e}", resolved.display()))
            })?;
            Ok(())
        }
    }
}

/// Renders a CSV table with LF endings and a trailing newline.
pub fn csv_table(header: &str, rows: &[String]) -> String {
    let mut text =
        String::with_capacity(header.len() + rows.iter().map(|r| r.len() + 1).sum::<usize>() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    text
}

/// Renders a JSON document with a trailing newline.
pub fn json_doc(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    text
}
