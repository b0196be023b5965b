use std::fmt;

use nalgebra::DMatrix;

use super::CommunityAssignment;
use crate::error::{Error, Result};

/// One broken invariant of a weight matrix or mask, with 0-based indices.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NotSquare { rows: usize, cols: usize },
    NonFinite { u: usize, v: usize },
    Asymmetric { u: usize, v: usize },
    Diagonal { u: usize },
    MaskShape { rows: usize, cols: usize },
    MaskAsymmetric { u: usize, v: usize },
    MaskDiagonal { u: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSquare { rows, cols } => write!(f, "weights are {rows}x{cols}"),
            Violation::NonFinite { u, v } => write!(f, "non-finite weight at ({u},{v})"),
            Violation::Asymmetric { u, v } => write!(f, "W[{u}][{v}] != W[{v}][{u}]"),
            Violation::Diagonal { u } => write!(f, "nonzero diagonal at ({u},{u})"),
            Violation::MaskShape { rows, cols } => write!(f, "mask is {rows}x{cols}"),
            Violation::MaskAsymmetric { u, v } => write!(f, "mask asymmetric at ({u},{v})"),
            Violation::MaskDiagonal { u } => write!(f, "diagonal ({u},{u}) marked missing"),
        }
    }
}

/// Checks a raw weight matrix and optional mask. Each asymmetric pair is
/// reported once, at its upper-triangle position.
pub fn validate(weights: &DMatrix<f64>, missing: Option<&DMatrix<bool>>) -> Vec<Violation> {
    let (rows, cols) = weights.shape();
    if rows != cols {
        return vec![Violation::NotSquare { rows, cols }];
    }
    let n = rows;
    let mut out = Vec::new();
    for u in 0..n {
        for v in 0..n {
            let w = weights[(u, v)];
            if !w.is_finite() {
                out.push(Violation::NonFinite { u, v });
            } else if u == v {
                if w != 0.0 {
                    out.push(Violation::Diagonal { u });
                }
            } else if u < v && w.to_bits() != weights[(v, u)].to_bits() {
                out.push(Violation::Asymmetric { u, v });
            }
        }
    }
    if let Some(m) = missing {
        if m.shape() != (n, n) {
            out.push(Violation::MaskShape {
                rows: m.nrows(),
                cols: m.ncols(),
            });
            return out;
        }
        for u in 0..n {
            if m[(u, u)] {
                out.push(Violation::MaskDiagonal { u });
            }
            for v in u + 1..n {
                if m[(u, v)] != m[(v, u)] {
                    out.push(Violation::MaskAsymmetric { u, v });
                }
            }
        }
    }
    out
}

fn join(vs: &[Violation]) -> String {
    let shown: Vec<String> = vs.iter().take(5).map(|v| v.to_string()).collect();
    let more = if vs.len() > 5 {
        format!(" (+{} more)", vs.len() - 5)
    } else {
        String::new()
    };
    format!("{}{more}", shown.join("; "))
}

/// Undirected weighted network without self-loops. Missing edges are held in
/// a mask; their weight entries are stored as 0 and never read.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedNetwork {
    weights: DMatrix<f64>,
    missing: Option<DMatrix<bool>>,
}

impl WeightedNetwork {
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        Self::with_mask(weights, None)
    }

    pub fn with_mask(mut weights: DMatrix<f64>, missing: Option<DMatrix<bool>>) -> Result<Self> {
        if let Some(m) = &missing {
            if m.shape() == weights.shape() {
                for (w, &gone) in weights.iter_mut().zip(m.iter()) {
                    if gone {
                        *w = 0.0;
                    }
                }
            }
        }
        let vs = validate(&weights, missing.as_ref());
        if !vs.is_empty() {
            return Err(Error::InvalidNetwork(join(&vs)));
        }
        // an all-false mask carries no information
        let missing = missing.filter(|m| m.iter().any(|&b| b));
        Ok(WeightedNetwork { weights, missing })
    }

    /// Sparse reading of a dense matrix: off-diagonal zeros become missing.
    pub fn sparse_from_zeros(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        let mask = DMatrix::from_fn(n, weights.ncols(), |u, v| u != v && weights[(u, v)] == 0.0);
        Self::with_mask(weights, Some(mask))
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn missing(&self) -> Option<&DMatrix<bool>> {
        self.missing.as_ref()
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weights[(u, v)]
    }

    /// True for off-diagonal, unmasked entries.
    pub fn is_present(&self, u: usize, v: usize) -> bool {
        u != v && !self.missing.as_ref().is_some_and(|m| m[(u, v)])
    }

    pub fn missing_count(&self) -> usize {
        self.missing
            .as_ref()
            .map_or(0, |m| m.iter().filter(|&&b| b).count() / 2)
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate(&self.weights, self.missing.as_ref())
    }

    /// Present edge weights of the block between communities `i` and `j`:
    /// unordered pairs u < v for `i == j`, all of `i × j` otherwise.
    pub fn block_weights(&self, assignment: &CommunityAssignment, i: usize, j: usize) -> Vec<f64> {
        let (a, b) = (assignment.members(i), assignment.members(j));
        let mut out = Vec::new();
        if i == j {
            for (x, &u) in a.iter().enumerate() {
                for &v in &a[x + 1..] {
                    if self.is_present(u, v) {
                        out.push(self.weights[(u, v)]);
                    }
                }
            }
        } else {
            for &u in a {
                for &v in b {
                    if self.is_present(u, v) {
                        out.push(self.weights[(u, v)]);
                    }
                }
            }
        }
        out
    }

    /// Rows `rows` × columns `cols` of the weight matrix.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |x, y| self.weights[(rows[x], cols[y])])
    }

    /// Mask of the same submatrix; diagonal positions of the full network
    /// (u == v) are reported as not missing.
    pub fn submask(&self, rows: &[usize], cols: &[usize]) -> Option<DMatrix<bool>> {
        self.missing.as_ref().map(|m| {
            DMatrix::from_fn(rows.len(), cols.len(), |x, y| m[(rows[x], cols[y])])
        })
    }

    /// Sum of present edge weights at each node.
    pub fn degrees(&self) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|u| {
                (0..n)
                    .filter(|&v| self.is_present(u, v))
                    .map(|v| self.weights[(u, v)])
                    .sum()
            })
            .collect()
    }
}
