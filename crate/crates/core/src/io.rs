//! Plain-text matrix files.
//!
//! One row per line, comma-separated decimals, with an optional leading
//! `# rows=<n> cols=<m>` line. Values are written with Rust's shortest
//! round-trip formatting so a write/read cycle is lossless.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut declared: Option<(usize, usize)> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if rows.is_empty() && declared.is_none() {
                declared = Some(parse_header(rest, line_no)?);
            }
            continue;
        }
        let values = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("{:?}: {e}", tok.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != values.len() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected {} values, found {}", first.len(), values.len()),
                });
            }
        }
        rows.push(values);
    }
    let m = DenseMatrix::from_rows(&rows)?;
    if let Some((r, c)) = declared {
        if (r, c) != m.shape() {
            return Err(Error::DimensionMismatch(format!(
                "header declares {r}x{c}, data is {}x{}",
                m.rows(),
                m.cols()
            )));
        }
    }
    Ok(m)
}

fn parse_header(rest: &str, line: usize) -> Result<(usize, usize)> {
    let mut rows = None;
    let mut cols = None;
    for part in rest.split_whitespace() {
        let parse = |v: &str| {
            v.parse::<usize>().map_err(|e| Error::Parse {
                line,
                msg: format!("bad header value {v:?}: {e}"),
            })
        };
        if let Some(v) = part.strip_prefix("rows=") {
            rows = Some(parse(v)?);
        } else if let Some(v) = part.strip_prefix("cols=") {
            cols = Some(parse(v)?);
        }
    }
    match (rows, cols) {
        (Some(r), Some(c)) => Ok((r, c)),
        _ => Err(Error::Parse {
            line,
            msg: "header must be `# rows=<n> cols=<m>`".into(),
        }),
    }
}

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = format!("# rows={} cols={}\n", m.rows(), m.cols());
    for i in 0..m.rows() {
        for (j, v) in m.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    fs::write(path, format_matrix(m))?;
    Ok(())
}
