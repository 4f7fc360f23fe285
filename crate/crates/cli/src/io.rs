//! File formats: matrix CSV, instance metadata, anchor lists.
//!
//! The CSV layout is one matrix row per line, comma-separated, no header,
//! LF endings. Values are written with 17 significant digits so that a
//! write/read round trip reproduces every f64 bit for bit.

use sepnmf_core::matrix::DenseMatrix;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::CliError;

/// Ground truth and provenance of a generated instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub regime: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shuffle_seed: Option<u64>,
    /// 1-based anchor column indices.
    pub true_anchors: Vec<usize>,
}

pub fn write_matrix_csv(path: &Path, m: &DenseMatrix) -> Result<(), CliError> {
    let mut out = String::with_capacity(m.rows() * m.cols() * 26);
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(',');
            }
            // 17 significant digits: lossless f64 round trip.
            write!(out, "{:.16e}", m.get(i, j)).expect("string write");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CliError::input(format!("write {}: {e}", path.display())))
}

pub fn read_matrix_csv(path: &Path) -> Result<DenseMatrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("read {}: {e}", path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (col, field) in line.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                CliError::input(format!(
                    "{}: line {}, field {}: not a number: '{}'",
                    path.display(),
                    lineno + 1,
                    col + 1,
                    field.trim()
                ))
            })?;
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(CliError::input(format!(
                    "{}: line {} has {} fields, expected {}",
                    path.display(),
                    lineno + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::input(format!("{}: empty matrix", path.display())));
    }
    DenseMatrix::from_rows(&rows)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::input(format!("serialize {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::input(format!("write {}: {e}", path.display())))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::input(format!("parse {}: {e}", path.display())))
}

/// One 1-based index per line.
pub fn write_anchors(path: &Path, anchors_one_based: &[usize]) -> Result<(), CliError> {
    let mut out = String::new();
    for &a in anchors_one_based {
        writeln!(out, "{a}").expect("string write");
    }
    fs::write(path, out).map_err(|e| CliError::input(format!("write {}: {e}", path.display())))
}
