//! Synthetic replicate networks drawn from a fitted model.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{FittedModel, PairModel, WeightedNetwork};
use crate::par;
use crate::rng::{substream, tag};

/// Below this fitted σ̂ the replicate noise level falls back to the pair MSE.
pub const SMALL_SIGMA: f64 = 0.01;

/// Noise level used for a pair's replicates.
pub fn bootstrap_sigma(pair: &PairModel) -> f64 {
    if pair.sigma_hat >= SMALL_SIGMA {
        pair.sigma_hat
    } else {
        pair.mse
    }
}

/// One row of a pair's replicate: member `r` of community `i` against the
/// member positions `cols` of community `j`.
fn replicate_row(pair: &PairModel, grid: &[f64], r: usize, cols: std::ops::Range<usize>, seed: u64) -> Vec<f64> {
    let mut rng = substream(seed, &[tag::BOOTSTRAP, pair.i as u64, pair.j as u64, r as u64]);
    if pair.g_hat.is_empty() {
        return vec![0.0; cols.len()];
    }
    if pair.medianized() {
        let sample = pair.g_hat.sample_values();
        return cols.map(|_| sample[rng.random_range(0..sample.len())]).collect();
    }
    let sb = bootstrap_sigma(pair);
    let norm = (1.0 + sb * sb).sqrt();
    let nc = pair.psi_j_wrt_i.len();
    cols.map(|c| {
        let eps: f64 = rng.sample(StandardNormal);
        pair.g_hat.nearest_value((grid[r * nc + c] + sb * eps) / norm)
    })
    .collect()
}

/// Draws a replicate network: each edge is the observed weight of its pair
/// whose normal score is nearest (Φ⁻¹Ĥ(Ψ̂_u, Ψ̂_v) + σ_b ε)/√(1 + σ_b²).
/// Spurious and degenerate pairs are resampled i.i.d. with replacement from
/// their observed weights.
pub fn bootstrap_replicate(model: &FittedModel, seed: u64) -> Result<WeightedNetwork> {
    model.validate()?;
    let a = &model.assignment;
    let mut tasks = Vec::new();
    for (p, pair) in model.pairs.iter().enumerate() {
        if pair.psi_i_wrt_j.len() != a.size(pair.i) || pair.psi_j_wrt_i.len() != a.size(pair.j) {
            return Err(Error::Dimension(format!("pair ({}, {}) does not match the assignment", pair.i, pair.j)));
        }
        for r in 0..a.size(pair.i) {
            tasks.push((p, r));
        }
    }
    let grids: Vec<Vec<f64>> = par::map_slice(&model.pairs, |pair| {
        if pair.medianized() {
            Vec::new()
        } else {
            pair.h_hat.score_grid(&pair.psi_i_wrt_j, &pair.psi_j_wrt_i)
        }
    });
    let rows = par::map_slice(&tasks, |&(p, r)| {
        let pair = &model.pairs[p];
        let cols = if pair.is_within() { r + 1..a.size(pair.j) } else { 0..a.size(pair.j) };
        (cols.start, replicate_row(pair, &grids[p], r, cols, seed))
    });
    let mut w = DMatrix::zeros(a.n(), a.n());
    for (&(p, r), (start, row)) in tasks.iter().zip(rows) {
        let pair = &model.pairs[p];
        let u = a.members(pair.i)[r];
        for (c, x) in (start..).zip(row) {
            let v = a.members(pair.j)[c];
            w[(u, v)] = x;
            w[(v, u)] = x;
        }
    }
    WeightedNetwork::new(w)
}
