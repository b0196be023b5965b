//! Screening for spurious pair fits against fictional noise blocks.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::block::Block;
use super::nsm::{assemble, select, Prepared};
use crate::error::{Error, Result};
use crate::hfunc::family_members;
use crate::model::PairModel;
use crate::par;
use crate::rng::{substream, tag};

pub const DEFAULT_REPLICATES: usize = 99;
pub const DEFAULT_QUANTILE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct ScreenResult {
    pub spurious: bool,
    /// The order statistic of the fictional MSEs the observed MSE must not exceed.
    pub threshold: f64,
    pub fictional: Vec<f64>,
}

/// An i.i.d. N(0, 1) block with the shape and mask of `block`.
pub fn fictional_block(block: &Block, seed: u64, replicate: usize) -> Block {
    let mut rng = substream(
        seed,
        &[tag::FICTIONAL, block.i as u64, block.j as u64, replicate as u64],
    );
    let (nr, nc) = block.weights.shape();
    let mut w = DMatrix::zeros(nr, nc);
    for (r, c) in block.positions() {
        let x: f64 = rng.sample(StandardNormal);
        w[(r, c)] = x;
        if block.within() {
            w[(c, r)] = x;
        }
    }
    if let Some(m) = &block.mask {
        w.zip_apply(m, |x, gone| {
            if gone {
                *x = 0.0
            }
        });
    }
    Block {
        weights: w,
        ..block.clone()
    }
}

fn check(replicates: usize, quantile: f64) -> Result<()> {
    if replicates < 19 {
        return Err(Error::InvalidParameter(format!(
            "spurious screen needs at least 19 replicates, got {replicates}"
        )));
    }
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(Error::InvalidParameter(format!("screen quantile {quantile}")));
    }
    Ok(())
}

/// Index (0-based, ascending order) of the threshold order statistic:
/// the round(q (R + 1))-th smallest value, at least the first.
pub fn threshold_rank(replicates: usize, quantile: f64) -> usize {
    let k = (quantile * (replicates as f64 + 1.0)).round() as usize;
    k.clamp(1, replicates) - 1
}

/// Compares `observed` with the MSEs that `fit` attains on `replicates`
/// fictional blocks shaped like `block`.
pub fn screen_with<F>(
    block: &Block,
    observed: f64,
    replicates: usize,
    quantile: f64,
    seed: u64,
    fit: F,
) -> Result<ScreenResult>
where
    F: Fn(&Block) -> Result<f64> + Sync + Send,
{
    check(replicates, quantile)?;
    let fictional = par::map_range(replicates, |r| fit(&fictional_block(block, seed, r)));
    let mut fictional = fictional.into_iter().collect::<Result<Vec<f64>>>()?;
    fictional.sort_by(f64::total_cmp);
    let threshold = fictional[threshold_rank(replicates, quantile)];
    Ok(ScreenResult {
        spurious: observed > threshold,
        threshold,
        fictional,
    })
}

/// Screens an H-Normal pair fit. Fictional blocks are fitted with the
/// catalog members of the family of the fitted Ĥ.
pub fn spurious_screen(
    pair: &PairModel,
    block: &Block,
    replicates: usize,
    quantile: f64,
    seed: u64,
) -> Result<ScreenResult> {
    let members = family_members(&pair.h_hat);
    screen_with(block, pair.mse, replicates, quantile, seed, |b| {
        let prep = Prepared::new(b)?;
        let (h, fit) = select(&prep, &members)?;
        Ok(assemble(b, prep, h, fit).mse)
    })
}
