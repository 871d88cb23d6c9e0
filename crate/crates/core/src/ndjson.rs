//! Canonical newline-delimited JSON: one object per line, keys sorted.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NdjsonError {
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{line}: {source}")]
    Json {
        path: String,
        line: usize,
        source: serde_json::Error,
    },
}

/// Serializes `value` as one canonical JSON line (no trailing newline).
///
/// Going through `serde_json::Value` sorts object keys, which makes the
/// output independent of struct field order.
pub fn canonical_line<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("value serializes to JSON");
    serde_json::to_string(&value).expect("JSON value serializes")
}

pub fn to_string<T: Serialize>(values: &[T]) -> String {
    let mut out = String::new();
    for v in values {
        out.push_str(&canonical_line(v));
        out.push('\n');
    }
    out
}

/// Parses every nonblank line; `path` is only used in error messages.
pub fn from_str<T: DeserializeOwned>(text: &str, path: &str) -> Result<Vec<T>, NdjsonError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(line).map_err(|source| NdjsonError::Json {
            path: path.to_string(),
            line: i + 1,
            source,
        })?;
        out.push(v);
    }
    Ok(out)
}

/// Reads a file; a missing file reads as empty.
pub fn read_file<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, NdjsonError> {
    let shown = path.display().to_string();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(NdjsonError::Io { path: shown, source }),
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| NdjsonError::Io {
            path: shown.clone(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|source| NdjsonError::Json {
                path: shown.clone(),
                line: i + 1,
                source,
            })?,
        );
    }
    Ok(out)
}

/// Replaces the file with `values`, then fsyncs.
pub fn write_file<T: Serialize>(path: &Path, values: &[T]) -> Result<(), NdjsonError> {
    let io_err = |source| NdjsonError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = File::create(path).map_err(io_err)?;
    file.write_all(to_string(values).as_bytes()).map_err(io_err)?;
    file.sync_all().map_err(io_err)
}

/// Appends one record and fsyncs before returning.
pub fn append<T: Serialize>(path: &Path, value: &T) -> Result<(), NdjsonError> {
    let io_err = |source| NdjsonError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err)?;
    let mut line = canonical_line(value);
    line.push('\n');
    file.write_all(line.as_bytes()).map_err(io_err)?;
    file.sync_all().map_err(io_err)
}
