//! File formats: dense CSV weight matrices, one-label-per-line community
//! files and JSON documents for models and specs.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{CommunityAssignment, WeightedNetwork};
use crate::error::{Error, Result};

/// `%.17g`: 17 significant digits, trailing zeros trimmed, exponent form
/// outside [1e-5, 1e17).
pub fn fmt_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let prec = (16 - exp).max(0) as usize;
        let s = format!("{x:.prec$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let m = mant.trim_end_matches('0').trim_end_matches('.');
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn is_missing_token(t: &str) -> bool {
    t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan")
}

/// Parses a dense CSV matrix. Empty, `NA` and `NaN` cells are returned as
/// `None`.
pub fn parse_matrix_csv(text: &str) -> Result<Vec<Vec<Option<f64>>>> {
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(col, cell)| {
                let t = cell.trim();
                if is_missing_token(t) {
                    Ok(None)
                } else {
                    t.parse::<f64>().map(Some).map_err(|_| {
                        Error::Parse(format!("line {}, column {}: {t:?} is not a number", ln + 1, col + 1))
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            let first: &Vec<Option<f64>> = first;
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "line {}: {} columns, expected {}",
                    ln + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no rows".into()));
    }
    Ok(rows)
}

/// Builds a network from CSV text. In sparse mode off-diagonal zeros are
/// treated as missing; blank/NA cells are missing in either mode.
pub fn network_from_csv(text: &str, sparse: bool) -> Result<WeightedNetwork> {
    let rows = parse_matrix_csv(text)?;
    let n = rows.len();
    if rows[0].len() != n {
        return Err(Error::InvalidNetwork(format!("{n} rows but {} columns", rows[0].len())));
    }
    let weights = DMatrix::from_fn(n, n, |u, v| rows[u][v].unwrap_or(0.0));
    let mask = DMatrix::from_fn(n, n, |u, v| {
        u != v && (rows[u][v].is_none() || (sparse && rows[u][v] == Some(0.0)))
    });
    WeightedNetwork::with_mask(weights, Some(mask))
}

pub fn load_network(path: impl AsRef<Path>, sparse: bool) -> Result<WeightedNetwork> {
    network_from_csv(&fs::read_to_string(path)?, sparse)
}

/// CSV text of a matrix; missing edges are written as 0.
pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut s = String::with_capacity(m.len() * 20);
    for u in 0..m.nrows() {
        for v in 0..m.ncols() {
            if v > 0 {
                s.push(',');
            }
            s.push_str(&fmt_g17(m[(u, v)]));
        }
        s.push('\n');
    }
    s
}

pub fn save_network(net: &WeightedNetwork, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, matrix_to_csv(net.weights()))?;
    Ok(())
}

pub fn labels_from_text(text: &str) -> Result<CommunityAssignment> {
    let ids = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(ln, l)| {
            l.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("labels line {}: {:?}", ln + 1, l.trim())))
        })
        .collect::<Result<Vec<_>>>()?;
    CommunityAssignment::new(ids)
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<CommunityAssignment> {
    labels_from_text(&fs::read_to_string(path)?)
}

pub fn save_labels(a: &CommunityAssignment, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for l in a.labels() {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn save_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
