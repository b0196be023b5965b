//! Ready-made benchmark configurations.

use super::{Link, LsmPairSpec};
use crate::hfunc::{Association, HFunction};
use crate::model::{CommunityAssignment, GeneratorSpec, PairSpec, PsiMode, ScoreFamily};
use crate::numeric::Distribution;

/// Ψ = .05, .075, …, .95 (37 values).
pub fn psi_grid() -> Vec<f64> {
    (0..37).map(|k| 0.05 + 0.025 * k as f64).collect()
}

/// The H-function built from two negative half-gamma variables.
pub fn half_gamma_h(association: Association) -> HFunction {
    let half = Distribution::NegGamma {
        shape: 0.5,
        rate: 1.0,
    };
    HFunction {
        construction: crate::hfunc::Construction::ConvolutionPair {
            f1: half.clone(),
            f2: half,
            f12: Distribution::NegGamma {
                shape: 1.0,
                rate: 1.0,
            },
        },
        association,
    }
}

/// `k` communities of 37 grid-Ψ nodes. Within blocks: half-gamma H with
/// positive association, weights U(0, 150). Between blocks: the same H with
/// negative association, weights U(0, 100).
pub fn grid_blocks(k: usize, sigma_within: f64, sigma_between: f64) -> GeneratorSpec {
    let labels: Vec<usize> = (1..=k).flat_map(|c| std::iter::repeat_n(c, 37)).collect();
    let assignment = CommunityAssignment::new(labels).expect("non-empty communities");
    let mut pairs = Vec::new();
    for i in 1..=k {
        for j in i..=k {
            let within = i == j;
            pairs.push(PairSpec {
                i,
                j,
                h: half_gamma_h(if within {
                    Association::Positive
                } else {
                    Association::Negative
                }),
                sigma: if within { sigma_within } else { sigma_between },
                marginal: Distribution::Uniform {
                    lo: 0.0,
                    hi: if within { 150.0 } else { 100.0 },
                },
                external_noise_sd: None,
                retention: None,
            });
        }
    }
    GeneratorSpec {
        assignment,
        pairs,
        psi_mode: PsiMode::Explicit {
            grids: vec![psi_grid(); k],
        },
    }
}

/// Four grid communities (148 nodes).
pub fn four_block(sigma_within: f64, sigma_between: f64) -> GeneratorSpec {
    grid_blocks(4, sigma_within, sigma_between)
}

/// Two grid communities (74 nodes), noise free: positive within and
/// negative between association.
pub fn two_block_mixed() -> GeneratorSpec {
    grid_blocks(2, 0.0, 0.0)
}

/// Two grid communities under a normal-score linear model:
/// 5 + 3Z_u + 3Z_v within, 8 − 3Z_u + 1.5Z_v between.
pub fn lsm_two_block(sigma: f64) -> (CommunityAssignment, Vec<LsmPairSpec>, PsiMode) {
    let labels: Vec<usize> = (1..=2).flat_map(|c| std::iter::repeat_n(c, 37)).collect();
    let assignment = CommunityAssignment::new(labels).expect("non-empty communities");
    let base = LsmPairSpec {
        i: 1,
        j: 1,
        gamma: 5.0,
        alpha: 3.0,
        beta: 3.0,
        h1: ScoreFamily::Normal,
        h2: ScoreFamily::Normal,
        sigma,
        link: Link::Identity,
    };
    let pairs = vec![
        base.clone(),
        LsmPairSpec {
            j: 2,
            gamma: 8.0,
            alpha: -3.0,
            beta: 1.5,
            ..base.clone()
        },
        LsmPairSpec { i: 2, j: 2, ..base },
    ];
    let mode = PsiMode::Explicit {
        grids: vec![psi_grid(); 2],
    };
    (assignment, pairs, mode)
}
