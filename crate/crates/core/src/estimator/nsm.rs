//! Rank-based fits of H-Normal nonlinear sociability models.

use nalgebra::DMatrix;

use super::block::Block;
use crate::error::{Error, Result};
use crate::hfunc::{rho_grid, Construction, HFunction};
use crate::model::{CommunityAssignment, PairModel, WeightedNetwork};
use crate::numeric::{rank_levels, EmpiricalCdf};
use crate::par;

/// Smallest signal scale s admitted by the fit; σ̂ is then about 1e9.
pub const S_MIN: f64 = 1e-9;

/// Local sociability statistics of one side of a block.
#[derive(Clone, Debug, PartialEq)]
pub struct SociabilityStats {
    /// D_j(u): sum of normal scores over the node's edges into the block.
    pub d: Vec<f64>,
    /// Tie-adjusted rank level of `d`, strictly inside (0, 1).
    pub psi_hat: Vec<f64>,
    /// Positions (within the side) of nodes with no present edge; their
    /// Ψ̂ is 0.5 and they are left out of the ranking.
    pub flagged: Vec<usize>,
}

fn side_stats(sums: Vec<f64>, counts: Vec<usize>, full: usize) -> SociabilityStats {
    let mut d = vec![0.0; sums.len()];
    let mut flagged = Vec::new();
    let mut usable = Vec::new();
    for (x, (&s, &c)) in sums.iter().zip(&counts).enumerate() {
        if c == 0 {
            flagged.push(x);
        } else {
            // with missing entries, rescale the mean to the full row length
            d[x] = if c == full { s } else { s / c as f64 * full as f64 };
            usable.push(x);
        }
    }
    let levels = rank_levels(&usable.iter().map(|&x| d[x]).collect::<Vec<_>>());
    let mut psi_hat = vec![0.5; sums.len()];
    for (&x, l) in usable.iter().zip(levels) {
        psi_hat[x] = l;
    }
    SociabilityStats { d, psi_hat, flagged }
}

/// Row- and column-side statistics of a block under the normal scores of `g`.
/// Missing entries are left out of the sums; a node with only some entries
/// missing has its sum rescaled to the full length.
pub fn block_sociability(block: &Block, g: &EmpiricalCdf) -> (SociabilityStats, SociabilityStats) {
    let (nr, nc) = block.weights.shape();
    let mut rs = vec![0.0; nr];
    let mut rn = vec![0usize; nr];
    let mut cs = vec![0.0; nc];
    let mut cn = vec![0usize; nc];
    for c in 0..nc {
        for r in 0..nr {
            if block.is_present(r, c) {
                let s = g.score(block.weights[(r, c)]);
                rs[r] += s;
                rn[r] += 1;
                cs[c] += s;
                cn[c] += 1;
            }
        }
    }
    if block.within() {
        let st = side_stats(rs, rn, nr.saturating_sub(1));
        (st.clone(), st)
    } else {
        (side_stats(rs, rn, nc), side_stats(cs, cn, nr))
    }
}

/// Local sociability of community `i` with respect to `j` and of `j` with
/// respect to `i`, using the empirical CDF of the block's present weights.
pub fn local_sociability(
    net: &WeightedNetwork,
    assignment: &CommunityAssignment,
    i: usize,
    j: usize,
) -> Result<(SociabilityStats, SociabilityStats)> {
    let block = Block::from_network(net, assignment, i, j);
    let g = EmpiricalCdf::from_weights(&block.edge_weights())?;
    let (a, b) = block_sociability(&block, &g);
    Ok(if i <= j { (a, b) } else { (b, a) })
}

/// Everything a candidate evaluation needs, computed once per block.
pub(crate) struct Prepared {
    pub edges: Vec<(usize, usize)>,
    pub g: Vec<f64>,
    pub g_hat: EmpiricalCdf,
    pub rows: SociabilityStats,
    pub cols: SociabilityStats,
    pub ncols: usize,
}

impl Prepared {
    pub fn new(block: &Block) -> Result<Self> {
        let edges = block.edges();
        if edges.is_empty() {
            return Err(Error::Empty("block has no present edges"));
        }
        let w: Vec<f64> = edges.iter().map(|&(r, c)| block.weights[(r, c)]).collect();
        let g_hat = EmpiricalCdf::from_weights(&w)?;
        let g = w.iter().map(|&x| g_hat.score(x)).collect();
        let (rows, cols) = block_sociability(block, &g_hat);
        Ok(Prepared {
            edges,
            g,
            g_hat,
            rows,
            cols,
            ncols: block.ncols(),
        })
    }

    fn scores(&self, h: &HFunction) -> Vec<f64> {
        let grid = h.score_grid(&self.rows.psi_hat, &self.cols.psi_hat);
        self.edges.iter().map(|&(r, c)| grid[r * self.ncols + c]).collect()
    }
}

/// Objective value and optimal signal scale of one candidate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateFit {
    pub objective: f64,
    pub s: f64,
}

/// Closed-form least-squares scale s* in [S_MIN, 1] and the resulting sum
/// of squared normal-space residuals.
pub fn project(g: &[f64], ht: &[f64]) -> CandidateFit {
    let (mut sgh, mut shh) = (0.0, 0.0);
    for (a, b) in g.iter().zip(ht) {
        sgh += a * b;
        shh += b * b;
    }
    let s = if shh > 0.0 { (sgh / shh).clamp(S_MIN, 1.0) } else { S_MIN };
    let objective = g.iter().zip(ht).map(|(a, b)| (a - s * b).powi(2)).sum();
    CandidateFit { objective, s }
}

pub(crate) fn evaluate(prep: &Prepared, h: &HFunction) -> CandidateFit {
    project(&prep.g, &prep.scores(h))
}

/// Golden-section search on log ρ over the grid cell(s) around `rho`.
fn refine_rho(prep: &Prepared, h: &HFunction, rho: f64, best: CandidateFit) -> (HFunction, CandidateFit) {
    let grid = rho_grid();
    let Some(k) = grid.iter().position(|&g| (g / rho - 1.0).abs() < 1e-12) else {
        return (h.clone(), best);
    };
    let lo = grid[k.saturating_sub(1)].ln();
    let hi = grid[(k + 1).min(grid.len() - 1)].ln();
    let with = |t: f64| HFunction {
        construction: Construction::NormalRho { rho: t.exp() },
        association: h.association,
    };
    let f = |t: f64| evaluate(prep, &with(t));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-7 {
        if f1.objective <= f2.objective {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    let (t, fit) = if f1.objective <= f2.objective { (x1, f1) } else { (x2, f2) };
    if fit.objective < best.objective {
        (with(t), fit)
    } else {
        (h.clone(), best)
    }
}

/// Selects the candidate minimizing the normal-space least-squares
/// objective (first on ties); a NormalRho winner from the ρ grid is refined
/// by golden-section search.
pub(crate) fn select(prep: &Prepared, candidates: &[HFunction]) -> Result<(HFunction, CandidateFit)> {
    if candidates.is_empty() {
        return Err(Error::Empty("no candidate H-functions"));
    }
    let fits = par::map_slice(candidates, |h| evaluate(prep, h));
    let mut best = 0;
    for (k, f) in fits.iter().enumerate() {
        if f.objective < fits[best].objective {
            best = k;
        }
    }
    let h = &candidates[best];
    Ok(match h.construction {
        Construction::NormalRho { rho } => refine_rho(prep, h, rho, fits[best]),
        _ => (h.clone(), fits[best]),
    })
}

pub(crate) fn sigma_from_s(s: f64) -> f64 {
    (1.0 / (s * s) - 1.0).max(0.0).sqrt()
}

pub(crate) fn assemble(block: &Block, prep: Prepared, h: HFunction, fit: CandidateFit) -> PairModel {
    let mse = fit.objective / prep.edges.len() as f64;
    let mut flagged: Vec<usize> = prep.rows.flagged.iter().map(|&x| block.rows[x]).collect();
    if !block.within() {
        flagged.extend(prep.cols.flagged.iter().map(|&x| block.cols[x]));
    }
    PairModel {
        i: block.i,
        j: block.j,
        g_hat: prep.g_hat,
        h_hat: h,
        sigma_hat: sigma_from_s(fit.s),
        psi_i_wrt_j: prep.rows.psi_hat,
        psi_j_wrt_i: prep.cols.psi_hat,
        mse,
        spurious: false,
        lsm_fit: None,
        degenerate: false,
        flagged_nodes: flagged,
    }
}

/// Fits an H-Normal model to the present edges of `block`.
pub fn fit_h_normal_nsm(block: &Block, candidates: &[HFunction]) -> Result<PairModel> {
    let prep = Prepared::new(block)?;
    let (h, fit) = select(&prep, candidates)?;
    Ok(assemble(block, prep, h, fit))
}

/// Signal scale s = 1/√(1 + σ̂²).
pub fn signal_scale(sigma: f64) -> f64 {
    1.0 / (1.0 + sigma * sigma).sqrt()
}

/// Smooth estimate of every block position as a matrix shaped like the
/// block (rows: members of `i`). Within blocks get a zero diagonal and are
/// symmetric; spurious or degenerate pairs are filled with the median.
pub fn smooth_block(pair: &PairModel) -> DMatrix<f64> {
    let (nr, nc) = (pair.psi_i_wrt_j.len(), pair.psi_j_wrt_i.len());
    if pair.medianized() {
        let m = if pair.g_hat.is_empty() { 0.0 } else { pair.g_hat.median() };
        let mut out = DMatrix::from_element(nr, nc, m);
        if pair.is_within() {
            out.fill_diagonal(0.0);
        }
        return out;
    }
    let s = signal_scale(pair.sigma_hat);
    let grid = pair.h_hat.score_grid(&pair.psi_i_wrt_j, &pair.psi_j_wrt_i);
    DMatrix::from_fn(nr, nc, |r, c| {
        if pair.is_within() && r == c {
            return 0.0;
        }
        let (a, b) = if pair.is_within() && r > c { (c, r) } else { (r, c) };
        pair.g_hat.nearest_value(s * grid[a * nc + b])
    })
}

/// Smooth estimate of one edge: the observed weight whose normal score is
/// nearest s·Φ⁻¹(Ĥ(Ψ̂_r, Ψ̂_c)), ties to the smaller weight. `r` and `c` are
/// positions within communities `i` and `j`.
pub fn smooth_estimate(pair: &PairModel, r: usize, c: usize) -> f64 {
    if pair.medianized() {
        return pair.g_hat.median();
    }
    let (r, c) = if pair.is_within() && r > c { (c, r) } else { (r, c) };
    let s = signal_scale(pair.sigma_hat);
    let t = pair
        .h_hat
        .score(pair.psi_i_wrt_j[r], pair.psi_j_wrt_i[c]);
    pair.g_hat.nearest_value(s * t)
}

/// Mean squared normal-space residual of `pair` over the present edges of
/// `block`.
pub fn normal_space_mse(pair: &PairModel, block: &Block) -> Result<f64> {
    let edges = block.edges();
    if edges.is_empty() {
        return Err(Error::Empty("block has no present edges"));
    }
    if pair.psi_i_wrt_j.len() != block.nrows() || pair.psi_j_wrt_i.len() != block.ncols() {
        return Err(Error::Dimension("pair model does not match block".into()));
    }
    let s = signal_scale(pair.sigma_hat);
    let grid = pair.h_hat.score_grid(&pair.psi_i_wrt_j, &pair.psi_j_wrt_i);
    let nc = block.ncols();
    let total: f64 = edges
        .iter()
        .map(|&(r, c)| (pair.g_hat.score(block.weights[(r, c)]) - s * grid[r * nc + c]).powi(2))
        .sum();
    Ok(total / edges.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate, presets};
    use crate::hfunc::{catalog, Family};
    use crate::model::PsiMode;
    use crate::numeric::stats::spearman;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn iid_block(n: usize, seed: u64) -> Block {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = DMatrix::zeros(n, n);
        for u in 0..n {
            for v in u + 1..n {
                let x: f64 = rng.sample(StandardNormal);
                w[(u, v)] = x;
                w[(v, u)] = x;
            }
        }
        Block::from_matrix(w, true, None).unwrap()
    }

    #[test]
    fn distinct_d_give_quartile_levels() {
        let st = side_stats(vec![3.0, -1.0, 0.5], vec![2; 3], 2);
        assert_eq!(st.psi_hat, vec![0.75, 0.25, 0.5]);
    }

    #[test]
    fn all_tied_d() {
        let st = side_stats(vec![1.0; 3], vec![2; 3], 2);
        for p in st.psi_hat {
            assert!((p - (1.5 + 1.0 / 6.0) / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn node_without_edges_is_flagged() {
        let st = side_stats(vec![1.0, 0.0, 2.0], vec![2, 0, 1], 2);
        assert_eq!(st.flagged, vec![1]);
        assert_eq!(st.psi_hat[1], 0.5);
        // the others are ranked among themselves: 2 * 1 rescaled beats 1
        assert_eq!(st.psi_hat[0], 1.0 / 3.0);
        assert_eq!(st.psi_hat[2], 2.0 / 3.0);
    }

    #[test]
    fn noise_free_grid_network() {
        let spec = presets::grid_blocks(2, 0.0, 0.0);
        let (net, psi) = generate(&spec, 0).unwrap();
        let a = &spec.assignment;
        let truth: Vec<f64> = a.members(1).iter().map(|&u| psi[u]).collect();
        for (i, j) in [(1, 1), (1, 2)] {
            let block = Block::from_network(&net, a, i, j);
            let pair = fit_h_normal_nsm(&block, &catalog()).unwrap();
            assert_eq!(
                pair.h_hat.family(),
                Family::ConvolutionPair("neg_gamma", "neg_gamma"),
                "{}",
                pair.h_hat.label()
            );
            let rho = spearman(&pair.psi_i_wrt_j, &truth);
            // between blocks have negative association, so Ψ̂ runs backwards
            let expect = if i == j { 1.0 } else { -1.0 };
            assert!((rho - expect).abs() < 1e-12, "({i},{j}) rho {rho}");
            assert!(pair.sigma_hat <= 0.02, "sigma {}", pair.sigma_hat);
            let direct = normal_space_mse(&pair, &block).unwrap();
            assert!((direct - pair.mse).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_free_mse_matches_rank_oracle() {
        // Ψ = r/38 makes Ψ̂ exact; what remains is the gap between ranks of
        // H over the edges and H at the node ranks (scipy: 0.011561440470861127)
        let mut spec = presets::grid_blocks(1, 0.0, 0.0);
        spec.psi_mode = PsiMode::Explicit {
            grids: vec![(1..=37).map(|r| r as f64 / 38.0).collect()],
        };
        let (net, _) = generate(&spec, 0).unwrap();
        let block = Block::from_network(&net, &spec.assignment, 1, 1);
        let h = presets::half_gamma_h(crate::hfunc::Association::Positive);
        let pair = fit_h_normal_nsm(&block, &[h]).unwrap();
        assert_eq!(pair.sigma_hat, 0.0);
        assert!((pair.mse - 0.011561440470861127).abs() < 1e-9, "mse {}", pair.mse);
        let best = fit_h_normal_nsm(&block, &catalog()).unwrap();
        assert!(best.mse <= pair.mse);
    }

    #[test]
    fn iid_block_mse_is_slightly_below_one() {
        for seed in 0..3 {
            let pair = fit_h_normal_nsm(&iid_block(74, seed), &catalog()).unwrap();
            assert!(pair.mse > 0.7 && pair.mse < 1.0, "mse {}", pair.mse);
        }
    }

    #[test]
    fn selected_candidate_is_the_argmin() {
        let block = iid_block(30, 11);
        let prep = Prepared::new(&block).unwrap();
        let cands = catalog();
        let (_, best) = select(&prep, &cands).unwrap();
        for h in &cands {
            assert!(best.objective <= evaluate(&prep, h).objective + 1e-12);
        }
    }

    #[test]
    fn smooth_estimate_limits() {
        // 231 edges: the median level is exactly 1/2
        let block = iid_block(22, 5);
        let mut pair = fit_h_normal_nsm(&block, &catalog()).unwrap();
        pair.sigma_hat = 1e12;
        let median = pair.g_hat.median();
        assert_eq!(smooth_estimate(&pair, 0, 1), median);

        let c = Block::from_matrix(DMatrix::from_element(6, 6, 2.5), true, None).unwrap();
        let pair = fit_h_normal_nsm(&c, &catalog()).unwrap();
        assert!(smooth_block(&pair).iter().enumerate().all(|(k, &x)| {
            let (r, col) = (k % 6, k / 6);
            x == if r == col { 0.0 } else { 2.5 }
        }));
    }

    #[test]
    fn empty_candidates_rejected() {
        assert!(fit_h_normal_nsm(&iid_block(5, 0), &[]).is_err());
    }
}
