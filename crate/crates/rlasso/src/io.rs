//! Text format for matrices and vectors.
//!
//! First line `M N`, then M lines of N space-separated decimal floats.
//! Floats are written with Rust's shortest-roundtrip formatting, so a
//! write/read cycle is bit-faithful. Vectors are stored as 1 x N matrices.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, DenseVector};
use std::fmt::Write as _;
use std::path::Path;

pub fn format_matrix(a: &DenseMatrix) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", a.rows(), a.cols()).unwrap();
    for i in 0..a.rows() {
        let row = a.row(i);
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{x}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Io("empty matrix file".into()))?;
    let mut parts = header.split_whitespace();
    let rows: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Io(format!("bad header line `{header}`")))?;
    let cols: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Io(format!("bad header line `{header}`")))?;
    let mut entries = Vec::with_capacity(rows * cols);
    for (i, line) in lines.take(rows).enumerate() {
        let mut count = 0;
        for tok in line.split_whitespace() {
            let x: f64 = tok
                .parse()
                .map_err(|_| Error::Io(format!("bad float `{tok}` in row {}", i + 1)))?;
            entries.push(x);
            count += 1;
        }
        if count != cols {
            return Err(Error::Io(format!(
                "row {} has {count} entries, expected {cols}",
                i + 1
            )));
        }
    }
    if entries.len() != rows * cols {
        return Err(Error::Io(format!(
            "expected {rows} rows, found {}",
            entries.len() / cols.max(1)
        )));
    }
    DenseMatrix::new(rows, cols, entries)
}

pub fn write_matrix(a: &DenseMatrix, path: &Path) -> Result<()> {
    std::fs::write(path, format_matrix(a))?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix(&text)
}

pub fn write_vector(v: &DenseVector, path: &Path) -> Result<()> {
    let m = DenseMatrix::new(1, v.len(), v.as_slice().to_vec())?;
    write_matrix(&m, path)
}

/// Accepts a single-row or single-column matrix.
pub fn read_vector(path: &Path) -> Result<DenseVector> {
    let m = read_matrix(path)?;
    if m.rows() != 1 && m.cols() != 1 {
        return Err(Error::Io(format!(
            "expected a vector file, got a {} x {} matrix",
            m.rows(),
            m.cols()
        )));
    }
    DenseVector::new(m.entries().to_vec())
}
