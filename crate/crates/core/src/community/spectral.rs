//! Spectral clustering with an L-based choice of K, and the row-normalized
//! eigenvector embedding.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::RngCore;

use super::measure::l_of_groups;
use crate::error::{Error, Result};
use crate::model::{CommunityAssignment, WeightedNetwork};
use crate::numeric::kmeans::DEFAULT_RESTARTS;
use crate::numeric::stats::{mean, sd};
use crate::numeric::{eigen_real_parts_top, eigenvalues_sorted, kmeans, Clustering};
use crate::par;
use crate::rng::{substream, tag};

pub const DEFAULT_REPLICATES: usize = 10;

/// Squared distances between rows, leaving out the two coordinates that
/// index the rows themselves.
pub fn row_distances(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let mut d = DMatrix::zeros(n, n);
    for u in 0..n {
        for v in u + 1..n {
            let s: f64 = (0..n)
                .filter(|&x| x != u && x != v)
                .map(|x| (w[(u, x)] - w[(v, x)]).powi(2))
                .sum();
            d[(u, v)] = s;
            d[(v, u)] = s;
        }
    }
    d
}

/// Pairwise distances (upper triangle) of the rows.
fn pair_distances(d2: &DMatrix<f64>) -> Vec<f64> {
    let n = d2.nrows();
    let mut out: Vec<f64> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .map(|(u, v)| d2[(u, v)].sqrt())
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn quantile_sorted(xs: &[f64], p: f64) -> f64 {
    if xs.is_empty() {
        return 1.0;
    }
    xs[((xs.len() - 1) as f64 * p).round() as usize]
}

/// Kernel widths tried for each clustering: distance quantiles from the
/// 1st percentile up to the median, log spaced.
pub const WIDTH_QUANTILES: [f64; 8] = [0.01, 0.0175, 0.03, 0.05, 0.0875, 0.15, 0.275, 0.5];

/// RBF affinities exp(−d²/(2m²)) with kernel width m; zero diagonal.
fn affinity_from(d2: &DMatrix<f64>, m: f64) -> DMatrix<f64> {
    let n = d2.nrows();
    let scale = if m > 0.0 { 2.0 * m * m } else { 1.0 };
    DMatrix::from_fn(n, n, |u, v| if u == v { 0.0 } else { (-d2[(u, v)] / scale).exp() })
}

/// RBF affinities with the width set to the median pairwise distance.
pub fn rbf_affinity(w: &DMatrix<f64>) -> DMatrix<f64> {
    let d2 = row_distances(w);
    let m = quantile_sorted(&pair_distances(&d2), 0.5);
    affinity_from(&d2, m)
}

/// Eigenvectors of D^{-1/2} A D^{-1/2}, columns ordered by decreasing
/// eigenvalue.
struct Spectrum {
    vectors: DMatrix<f64>,
}

impl Spectrum {
    fn new(a: DMatrix<f64>) -> Self {
        let n = a.nrows();
        let deg: Vec<f64> = (0..n).map(|u| a.row(u).sum()).collect();
        let inv = |d: f64| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 };
        let m = DMatrix::from_fn(n, n, |u, v| a[(u, v)] * inv(deg[u]) * inv(deg[v]));
        let eig = SymmetricEigen::new(m);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
        Spectrum { vectors }
    }

    /// k-means of the row-normalized leading `k` eigenvectors.
    fn cluster(&self, k: usize, seed: u64) -> Result<Clustering> {
        let mut x = self.vectors.columns(0, k).into_owned();
        for mut row in x.row_iter_mut() {
            let norm = row.norm();
            if norm > 0.0 {
                row /= norm;
            }
        }
        kmeans(&x, k, DEFAULT_RESTARTS, seed)
    }
}

/// Spectra of the network for every candidate kernel width.
struct Spectra {
    widths: Vec<Spectrum>,
}

impl Spectra {
    fn new(w: &DMatrix<f64>) -> Self {
        let d2 = row_distances(w);
        let dists = pair_distances(&d2);
        let widths = par::map_slice(&WIDTH_QUANTILES, |&p| {
            Spectrum::new(affinity_from(&d2, quantile_sorted(&dists, p)))
        });
        Spectra { widths }
    }

    /// One spectral clustering into `k` groups: the kernel width whose
    /// k-means solution is tightest wins (first on ties).
    fn cluster(&self, k: usize, seed: u64) -> Result<Vec<usize>> {
        let n = self.widths[0].vectors.nrows();
        if k == 1 {
            return Ok(vec![1; n]);
        }
        let mut best: Option<Clustering> = None;
        for s in &self.widths {
            let c = s.cluster(k, seed)?;
            if best.as_ref().is_none_or(|b| c.cost < b.cost) {
                best = Some(c);
            }
        }
        Ok(best.expect("at least one width").labels)
    }
}

fn groups(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().copied().max().unwrap_or(0);
    let mut g = vec![Vec::new(); k];
    for (u, &l) in labels.iter().enumerate() {
        g[l - 1].push(u);
    }
    g.retain(|m| !m.is_empty());
    g
}

/// Spectral clustering into `k` groups, best L over `replicates` runs.
/// Returns the labels and their L.
pub fn spectral_k(net: &WeightedNetwork, k: usize, replicates: usize, seed: u64) -> Result<(Vec<usize>, f64)> {
    let spectra = Spectra::new(net.weights());
    best_of(&spectra, net.weights(), k, replicates, seed)
}

fn best_of(s: &Spectra, w: &DMatrix<f64>, k: usize, replicates: usize, seed: u64) -> Result<(Vec<usize>, f64)> {
    let runs = par::map_range(replicates.max(1), |r| -> Result<(Vec<usize>, f64)> {
        let run_seed = substream(seed, &[tag::SPECTRAL, k as u64, r as u64]).next_u64();
        let labels = s.cluster(k, run_seed)?;
        let l = l_of_groups(w, &groups(&labels));
        Ok((labels, l))
    });
    let mut best: Option<(Vec<usize>, f64)> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.1 > b.1) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one replicate"))
}

/// For K = 1, 2, … takes the best-L spectral clustering over `replicates`
/// runs and stops at the first K that does not strictly improve L,
/// returning the clustering for K − 1.
pub fn spectral_communities(net: &WeightedNetwork, replicates: usize, seed: u64) -> Result<CommunityAssignment> {
    let n = net.n();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("spectral detection needs 3 nodes, got {n}")));
    }
    let spectra = Spectra::new(net.weights());
    let mut prev: (Vec<usize>, f64) = (vec![1; n], f64::NEG_INFINITY);
    for k in 1..=n {
        let cur = best_of(&spectra, net.weights(), k, replicates, seed)?;
        if !(cur.1 > prev.1) {
            break;
        }
        prev = cur;
    }
    CommunityAssignment::from_raw(&prev.0)
}

#[derive(Clone, Debug)]
pub struct Embedding {
    /// Row u holds the coordinates of node u.
    pub coords: DMatrix<f64>,
    /// Number of leading eigenvectors kept: the position of the largest gap
    /// between successive |Re λ|.
    pub gap_index: usize,
}

/// Standardizes each row of the weight matrix, then embeds the nodes with
/// the real parts of the eigenvectors before the largest eigenvalue gap.
pub fn normalized_embedding(net: &WeightedNetwork) -> Result<Embedding> {
    let w = net.weights();
    let n = w.nrows();
    if n < 2 {
        return Err(Error::InvalidParameter("embedding needs at least 2 nodes".into()));
    }
    let mut m = w.clone();
    for u in 0..n {
        let row: Vec<f64> = w.row(u).iter().copied().collect();
        let (mu, s) = (mean(&row), sd(&row));
        if !(s > 0.0) {
            return Err(Error::InvalidNetwork(format!("node {u} has constant edge weights")));
        }
        for v in 0..n {
            m[(u, v)] = (w[(u, v)] - mu) / s;
        }
    }
    let values = eigenvalues_sorted(&m)?;
    let mut gap_index = 1;
    let mut best = f64::NEG_INFINITY;
    for k in 0..n - 1 {
        let g = values[k].re.abs() - values[k + 1].re.abs();
        if g > best {
            best = g;
            gap_index = k + 1;
        }
    }
    let eig = eigen_real_parts_top(&m, gap_index)?;
    Ok(Embedding {
        coords: eig.vectors,
        gap_index,
    })
}
