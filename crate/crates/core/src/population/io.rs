//! CSV matrices: one row per individual, comma-separated decimals, with an
//! optional single leading header line starting with `#`.

use std::path::Path;

use ndarray::Array2;

use super::{ErrorMatrix, SupportMatrix};
use crate::error::{Error, Result};

pub fn read_error_csv(path: impl AsRef<Path>) -> Result<ErrorMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_error_csv(&text)
}

pub fn read_support_csv(path: impl AsRef<Path>) -> Result<SupportMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_support_csv(&text)
}

pub fn parse_error_csv(text: &str) -> Result<ErrorMatrix> {
    let (values, _) = parse_rows(text)?;
    match ErrorMatrix::new(values) {
        // Report non-finite cells against the file, not the matrix.
        Err(Error::NonFinite { row, col }) => Err(Error::Parse {
            line: row + header_offset(text) + 1,
            message: format!("non-finite value in column {}", col + 1),
        }),
        other => other,
    }
}

pub fn parse_support_csv(text: &str) -> Result<SupportMatrix> {
    let (values, lines) = parse_rows(text)?;
    for ((row, col), &v) in values.indexed_iter() {
        if v != 0.0 && v != 1.0 {
            return Err(Error::Parse {
                line: lines[row],
                message: format!("support value {v} in column {} is not 0 or 1", col + 1),
            });
        }
    }
    SupportMatrix::new(values)
}

fn header_offset(text: &str) -> usize {
    usize::from(text.trim_start_matches('\u{feff}').starts_with('#'))
}

/// Returns the matrix plus the 1-based file line of every row.
fn parse_rows(text: &str) -> Result<(Array2<f64>, Vec<usize>)> {
    let text = text.trim_start_matches('\u{feff}');
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut flat = Vec::new();
    let mut lines = Vec::new();
    let mut width = None;
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if idx == 0 && record.get(0).is_some_and(|f| f.starts_with('#')) {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {w} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {}: `{field}` is not a number", col + 1),
            })?;
            flat.push(v);
        }
        lines.push(line);
    }
    let n = lines.len();
    let m = width.unwrap_or(0);
    if n == 0 {
        return Err(Error::Parse {
            line: 0,
            message: "no data rows".into(),
        });
    }
    let values = Array2::from_shape_vec((n, m), flat).map_err(|e| Error::Shape(e.to_string()))?;
    Ok((values, lines))
}
