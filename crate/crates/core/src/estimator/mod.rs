//! Fitting sociability models to observed networks.

mod block;
mod lsm;
mod missing;
mod nsm;
mod screen;

pub use block::Block;
pub use lsm::{
    fit_family, fit_lsm_general, fit_normal_lsm, implied_h, impute_diagonal, lsm_pair_model,
    select_family, FamilyFit, LinearFit,
};
pub use missing::{default_epsilon, fit_missing, MissingFit, DEFAULT_MAX_ITERS};
pub use nsm::{
    block_sociability, fit_h_normal_nsm, local_sociability, normal_space_mse, project,
    signal_scale, smooth_block, smooth_estimate, CandidateFit, SociabilityStats, S_MIN,
};
pub use screen::{
    fictional_block, screen_with, spurious_screen, threshold_rank, ScreenResult,
    DEFAULT_QUANTILE, DEFAULT_REPLICATES,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hfunc::{catalog, Association, HFunction};
use crate::model::{pairs, CommunityAssignment, FittedModel, PairModel, ScoreFamily, WeightedNetwork};
use crate::numeric::EmpiricalCdf;
use crate::par;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    /// Rank-based H-Normal nonlinear model.
    #[default]
    Nsm,
    /// Linear model with normal scores.
    NormalLsm,
    /// Linear model with score families chosen by likelihood.
    Lsm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScreenOptions {
    pub replicates: usize,
    pub quantile: f64,
}

impl Default for ScreenOptions {
    fn default() -> Self {
        ScreenOptions {
            replicates: DEFAULT_REPLICATES,
            quantile: DEFAULT_QUANTILE,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitOptions {
    pub mode: FitMode,
    pub candidates: Vec<HFunction>,
    pub families: Vec<ScoreFamily>,
    pub screen: Option<ScreenOptions>,
    pub seed: u64,
    /// Tolerance of the missing-edge iteration; `None` scales with the
    /// number of masked entries.
    pub missing_epsilon: Option<f64>,
    pub missing_max_iters: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            mode: FitMode::Nsm,
            candidates: catalog(),
            families: ScoreFamily::ALL.to_vec(),
            screen: None,
            seed: 0,
            missing_epsilon: None,
            missing_max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

/// The median-weight model used for blocks too small to fit.
pub fn degenerate_pair(block: &Block) -> Result<PairModel> {
    let w = block.edge_weights();
    let g_hat = if w.is_empty() {
        EmpiricalCdf::empty()
    } else {
        EmpiricalCdf::from_weights(&w)?
    };
    let mut pair = PairModel {
        i: block.i,
        j: block.j,
        g_hat,
        h_hat: HFunction::normal_rho(1.0, Association::Positive)?,
        sigma_hat: 0.0,
        psi_i_wrt_j: vec![0.5; block.nrows()],
        psi_j_wrt_i: vec![0.5; block.ncols()],
        mse: 0.0,
        spurious: false,
        lsm_fit: None,
        degenerate: true,
        flagged_nodes: Vec::new(),
    };
    if !w.is_empty() {
        pair.mse = normal_space_mse(&pair, block)?;
    }
    Ok(pair)
}

fn too_small(block: &Block, mode: FitMode) -> bool {
    if block.edges().is_empty() {
        return true;
    }
    match mode {
        FitMode::Nsm => block.nrows() < 2 || block.ncols() < 2,
        FitMode::NormalLsm | FitMode::Lsm => {
            if block.within() {
                block.nrows() < 3
            } else {
                block.nrows() < 2 || block.ncols() < 2
            }
        }
    }
}

fn lsm_fit(block: &Block, opts: &FitOptions) -> Result<PairModel> {
    let fit = match opts.mode {
        FitMode::Lsm => fit_lsm_general(block, &opts.families)?,
        _ => fit_normal_lsm(block)?,
    };
    lsm_pair_model(block, &fit)
}

/// Fits one block under `opts`, including the missing-edge iteration and
/// the optional spurious screen.
pub fn fit_block(block: &Block, opts: &FitOptions) -> Result<PairModel> {
    if too_small(block, opts.mode) {
        return degenerate_pair(block);
    }
    let mut pair = match opts.mode {
        FitMode::Nsm if block.mask.is_some() => {
            let eps = opts.missing_epsilon.unwrap_or_else(|| default_epsilon(block));
            fit_missing(block, &opts.candidates, eps, opts.missing_max_iters)?.pair
        }
        FitMode::Nsm => fit_h_normal_nsm(block, &opts.candidates)?,
        FitMode::NormalLsm | FitMode::Lsm => lsm_fit(block, opts)?,
    };
    if let (Some(s), false) = (opts.screen, pair.degenerate) {
        let res = match opts.mode {
            FitMode::Nsm => spurious_screen(&pair, block, s.replicates, s.quantile, opts.seed)?,
            _ => screen_with(block, pair.mse, s.replicates, s.quantile, opts.seed, |b| {
                Ok(lsm_fit(b, opts)?.mse)
            })?,
        };
        pair.spurious = res.spurious;
    }
    Ok(pair)
}

/// Fits every unordered community pair of `net`.
pub fn fit_network(
    net: &WeightedNetwork,
    assignment: &CommunityAssignment,
    opts: &FitOptions,
) -> Result<FittedModel> {
    let blocks: Vec<Block> = pairs(assignment.k())
        .into_iter()
        .map(|(i, j)| Block::from_network(net, assignment, i, j))
        .collect();
    let fitted = par::map_slice(&blocks, |b| fit_block(b, opts));
    let pairs = fitted.into_iter().collect::<Result<Vec<_>>>()?;
    FittedModel::new(assignment.clone(), pairs)
}

/// Smooth reconstruction of the whole network: every block replaced by its
/// smooth estimate (median for spurious or degenerate pairs).
pub fn smooth_network(model: &FittedModel) -> DMatrix<f64> {
    let a = &model.assignment;
    let n = a.n();
    let mut out = DMatrix::zeros(n, n);
    for pair in &model.pairs {
        let e = smooth_block(pair);
        let rows = a.members(pair.i);
        let cols = a.members(pair.j);
        for (r, &u) in rows.iter().enumerate() {
            for (c, &v) in cols.iter().enumerate() {
                if u != v {
                    out[(u, v)] = e[(r, c)];
                    out[(v, u)] = e[(r, c)];
                }
            }
        }
    }
    out
}
