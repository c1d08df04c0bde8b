//! `matx v1` plain-text matrices: a header line `rows cols` followed by one
//! line per row of whitespace-separated decimals. Values are written with 17
//! significant digits so they round-trip exactly.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::{CrbError, Result};

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_string(m: &DMatrix<f64>) -> String {
    let mut out = format!("{} {}\n", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| fmt_f64(m[(r, c)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Parses one matrix from the start of `text`; returns it with the number
/// of lines consumed.
pub fn parse_prefix(text: &str) -> Result<(DMatrix<f64>, usize)> {
    let mut lines = text.lines().enumerate();
    let (hline, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| CrbError::Parse {
            line: 1,
            msg: "missing `rows cols` header".into(),
        })?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let parse_dim = |s: &str| {
        s.parse::<usize>().map_err(|_| CrbError::Parse {
            line: hline + 1,
            msg: format!("bad dimension `{s}`"),
        })
    };
    if dims.len() != 2 {
        return Err(CrbError::Parse {
            line: hline + 1,
            msg: format!("header must be `rows cols`, got `{header}`"),
        });
    }
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);

    let mut data = Vec::with_capacity(rows * cols);
    let mut consumed = hline + 1;
    for _ in 0..rows {
        let (idx, line) = lines.next().ok_or_else(|| CrbError::Parse {
            line: consumed + 1,
            msg: format!("expected {rows} rows"),
        })?;
        consumed = idx + 1;
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| CrbError::Parse {
                line: idx + 1,
                msg: format!("bad number `{tok}`"),
            })?;
            data.push(v);
        }
        if data.len() - before != cols {
            return Err(CrbError::Parse {
                line: idx + 1,
                msg: format!("expected {cols} values, got {}", data.len() - before),
            });
        }
    }
    Ok((DMatrix::from_row_slice(rows, cols, &data), consumed))
}

pub fn parse(text: &str) -> Result<DMatrix<f64>> {
    let (m, consumed) = parse_prefix(text)?;
    if let Some((i, l)) = text
        .lines()
        .enumerate()
        .skip(consumed)
        .find(|(_, l)| !l.trim().is_empty())
    {
        return Err(CrbError::Parse {
            line: i + 1,
            msg: format!("trailing content `{}`", l.trim()),
        });
    }
    Ok(m)
}

pub fn read(path: &Path) -> Result<DMatrix<f64>> {
    parse(&std::fs::read_to_string(path)?)
}

pub fn write(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    std::fs::write(path, to_string(m))?;
    Ok(())
}
