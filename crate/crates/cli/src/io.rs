//! File formats: the tabulated-distribution input and CSV/JSON outputs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bandwagon::Tabulated;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::format::round_json;

#[derive(Debug, Deserialize)]
struct TableRow {
    x: f64,
    #[serde(rename = "F")]
    cdf: f64,
}

/// Reads a two-column `x,F` CSV with header into a tabulated distribution.
pub fn read_table(path: &Path) -> Result<Tabulated> {
    let bad = |msg: String| CliError::config(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "F" {
        return Err(bad("expected header row 'x,F'".into()));
    }
    let rows: Vec<(f64, f64)> = reader
        .deserialize::<TableRow>()
        .map(|r| r.map(|r| (r.x, r.cdf)).map_err(|e| bad(e.to_string())))
        .collect::<Result<_>>()?;
    Tabulated::new(&rows).map_err(|e| bad(e.to_string()))
}

/// Creates `dir` if needed.
pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes a CSV file from a header and string rows.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<PathBuf>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(path.to_path_buf())
}

/// Renders CSV to a string, for standard output.
pub fn csv_string<I>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

/// Pretty JSON with every number rounded to 12 significant digits.
pub fn json_string(value: Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&round_json(value))?;
    s.push('\n');
    Ok(s)
}

/// Writes `text` to `path`.
pub fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    let mut f = fs::File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(path.to_path_buf())
}
