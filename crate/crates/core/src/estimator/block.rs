use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{CommunityAssignment, WeightedNetwork};

/// The subnetwork between communities `i` and `j`. Rows are the members of
/// `i`, columns the members of `j`; a within block is square with a
/// structurally zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub i: usize,
    pub j: usize,
    /// Global node ids of the rows and columns.
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub weights: DMatrix<f64>,
    /// `true` marks a missing entry; never set on a within diagonal.
    pub mask: Option<DMatrix<bool>>,
}

impl Block {
    pub fn from_network(net: &WeightedNetwork, assignment: &CommunityAssignment, i: usize, j: usize) -> Self {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let rows = assignment.members(i).to_vec();
        let cols = assignment.members(j).to_vec();
        let weights = net.submatrix(&rows, &cols);
        let mask = net.submask(&rows, &cols).filter(|m| m.iter().any(|&b| b));
        Block {
            i,
            j,
            rows,
            cols,
            weights,
            mask,
        }
    }

    /// A stand-alone block, labelled (1, 1) if `within`, else (1, 2). A
    /// within block must be square; its diagonal is ignored.
    pub fn from_matrix(weights: DMatrix<f64>, within: bool, mask: Option<DMatrix<bool>>) -> Result<Self> {
        let (r, c) = weights.shape();
        if within && r != c {
            return Err(Error::Dimension(format!("within block is {r}x{c}")));
        }
        if let Some(m) = &mask {
            if m.shape() != (r, c) {
                return Err(Error::Dimension("mask shape differs from block".into()));
            }
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Domain("block has non-finite weights".into()));
        }
        let mut weights = weights;
        let mut mask = mask.filter(|m| m.iter().any(|&b| b));
        if within {
            for u in 0..r {
                weights[(u, u)] = 0.0;
                if let Some(m) = mask.as_mut() {
                    m[(u, u)] = false;
                }
            }
        }
        Ok(Block {
            i: 1,
            j: if within { 1 } else { 2 },
            rows: (0..r).collect(),
            cols: if within { (0..r).collect() } else { (r..r + c).collect() },
            weights,
            mask,
        })
    }

    pub fn within(&self) -> bool {
        self.i == self.j
    }

    pub fn nrows(&self) -> usize {
        self.weights.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.weights.ncols()
    }

    pub fn is_present(&self, r: usize, c: usize) -> bool {
        !(self.within() && r == c) && !self.mask.as_ref().is_some_and(|m| m[(r, c)])
    }

    pub fn is_missing(&self, r: usize, c: usize) -> bool {
        self.mask.as_ref().is_some_and(|m| m[(r, c)])
    }

    /// Edge positions: r < c for within blocks, every (r, c) otherwise.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        let (nr, nc) = self.weights.shape();
        if self.within() {
            (0..nr).flat_map(|r| (r + 1..nc).map(move |c| (r, c))).collect()
        } else {
            (0..nr).flat_map(|r| (0..nc).map(move |c| (r, c))).collect()
        }
    }

    /// Positions of present edges.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.positions()
            .into_iter()
            .filter(|&(r, c)| self.is_present(r, c))
            .collect()
    }

    pub fn edge_weights(&self) -> Vec<f64> {
        self.edges().into_iter().map(|(r, c)| self.weights[(r, c)]).collect()
    }

    pub fn missing_count(&self) -> usize {
        self.positions()
            .into_iter()
            .filter(|&(r, c)| self.is_missing(r, c))
            .count()
    }

    /// Copy with `values` written into the missing positions and the mask
    /// dropped. `values` is indexed like the block matrix.
    pub fn filled(&self, values: &DMatrix<f64>) -> Block {
        let mut w = self.weights.clone();
        if let Some(m) = &self.mask {
            for c in 0..w.ncols() {
                for r in 0..w.nrows() {
                    if m[(r, c)] {
                        w[(r, c)] = values[(r, c)];
                    }
                }
            }
        }
        Block {
            weights: w,
            mask: None,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn within_edges_are_upper_triangle() {
        let w = DMatrix::from_fn(4, 4, |r, c| (r + c) as f64);
        let b = Block::from_matrix(w, true, None).unwrap();
        assert_eq!(b.edges().len(), 6);
        assert!(b.edges().iter().all(|&(r, c)| r < c));
        assert_eq!(b.weights[(2, 2)], 0.0);
    }

    #[test]
    fn masked_entries_are_skipped_and_filled() {
        let w = DMatrix::from_element(2, 3, 1.0);
        let mut m = DMatrix::from_element(2, 3, false);
        m[(1, 2)] = true;
        let b = Block::from_matrix(w, false, Some(m)).unwrap();
        assert_eq!(b.edges().len(), 5);
        assert_eq!(b.missing_count(), 1);
        let f = b.filled(&DMatrix::from_element(2, 3, 7.0));
        assert_eq!(f.weights[(1, 2)], 7.0);
        assert_eq!(f.weights[(0, 0)], 1.0);
        assert!(f.mask.is_none());
    }

    #[test]
    fn from_network_orders_pair() {
        let a = CommunityAssignment::new(vec![2, 1, 2]).unwrap();
        let w = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 2.0, 1.0, 0.0, 3.0, 2.0, 3.0, 0.0]);
        let net = WeightedNetwork::new(w).unwrap();
        let b = Block::from_network(&net, &a, 2, 1);
        assert_eq!((b.i, b.j), (1, 2));
        assert_eq!(b.rows, vec![1]);
        assert_eq!(b.cols, vec![0, 2]);
        assert_eq!(b.weights, DMatrix::from_row_slice(1, 2, &[1.0, 3.0]));
    }
}
