//! Iterative fitting of blocks with missing edges.

use nalgebra::DMatrix;

use super::block::Block;
use super::nsm::{fit_h_normal_nsm, smooth_block};
use crate::error::{Error, Result};
use crate::hfunc::HFunction;
use crate::model::PairModel;

pub const DEFAULT_MAX_ITERS: usize = 100;

/// Default stopping tolerance: 1e-4 per masked entry.
pub fn default_epsilon(block: &Block) -> f64 {
    1e-4 * block.missing_count() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct MissingFit {
    pub pair: PairModel,
    /// The block with masked entries replaced by their final estimates.
    pub imputed: DMatrix<f64>,
    /// Refitting passes after the initial one.
    pub iterations: usize,
    /// Δ of each refitting pass.
    pub deltas: Vec<f64>,
}

fn masked_sq_diff(block: &Block, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let Some(m) = &block.mask else { return 0.0 };
    let mut s = 0.0;
    for (r, c) in block.positions() {
        if m[(r, c)] {
            s += (a[(r, c)] - b[(r, c)]).powi(2);
        }
    }
    s
}

/// Fits a block whose mask marks missing edges. The first pass ranks and
/// fits the present edges only; every later pass fills the missing entries
/// with the current smooth estimates and refits the completed block, until
/// the squared change of the estimates on missing entries is at most
/// `epsilon` or `max_iters` refits have run.
pub fn fit_missing(
    block: &Block,
    candidates: &[HFunction],
    epsilon: f64,
    max_iters: usize,
) -> Result<MissingFit> {
    if block.edges().is_empty() {
        return Err(Error::Empty("block has no present edges"));
    }
    let first = fit_h_normal_nsm(block, candidates)?;
    let flagged = first.flagged_nodes.clone();
    let mut estimate = smooth_block(&first);
    let mut pair = first;
    let mut deltas = Vec::new();
    while deltas.len() < max_iters {
        let filled = block.filled(&estimate);
        let next = fit_h_normal_nsm(&filled, candidates)?;
        let e = smooth_block(&next);
        let delta = masked_sq_diff(block, &e, &estimate);
        deltas.push(delta);
        pair = next;
        estimate = e;
        if delta <= epsilon {
            break;
        }
    }
    pair.flagged_nodes = flagged;
    let imputed = block.filled(&estimate).weights;
    Ok(MissingFit {
        pair,
        imputed,
        iterations: deltas.len(),
        deltas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate, presets};
    use crate::hfunc::catalog;

    #[test]
    fn empty_mask_matches_dense_fit() {
        let spec = presets::grid_blocks(1, 0.0, 0.0);
        let (net, _) = generate(&spec, 0).unwrap();
        let block = Block::from_network(&net, &spec.assignment, 1, 1);
        let m = fit_missing(&block, &catalog(), 0.0, 10).unwrap();
        assert_eq!(m.iterations, 1);
        assert_eq!(m.deltas, vec![0.0]);
        assert_eq!(m.pair, fit_h_normal_nsm(&block, &catalog()).unwrap());
    }

    #[test]
    fn no_present_edges() {
        let mask = DMatrix::from_element(3, 3, true);
        let b = Block::from_matrix(DMatrix::zeros(3, 3), false, Some(mask)).unwrap();
        assert!(fit_missing(&b, &catalog(), 0.0, 5).is_err());
    }
}
