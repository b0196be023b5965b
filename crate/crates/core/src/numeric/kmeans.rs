//! Lloyd's k-means with k-means++ seeding and restarts.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::par;
use crate::rng::{substream, tag};

pub const DEFAULT_RESTARTS: usize = 10;
const MAX_ITER: usize = 100;

#[derive(Clone, Debug)]
pub struct Clustering {
    /// Cluster of each row, in 1..=k.
    pub labels: Vec<usize>,
    /// Within-cluster sum of squares.
    pub cost: f64,
}

fn dist2(points: &DMatrix<f64>, i: usize, centers: &DMatrix<f64>, c: usize) -> f64 {
    (0..points.ncols())
        .map(|d| (points[(i, d)] - centers[(c, d)]).powi(2))
        .sum()
}

fn plus_plus<R: Rng>(points: &DMatrix<f64>, k: usize, rng: &mut R) -> DMatrix<f64> {
    let (m, d) = points.shape();
    let mut centers = DMatrix::zeros(k, d);
    let first = rng.random_range(0..m);
    centers.row_mut(0).copy_from(&points.row(first));
    let mut best: Vec<f64> = (0..m).map(|i| dist2(points, i, &centers, 0)).collect();
    for c in 1..k {
        let total: f64 = best.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut idx = m - 1;
            for (i, &w) in best.iter().enumerate() {
                if r < w {
                    idx = i;
                    break;
                }
                r -= w;
            }
            idx
        } else {
            rng.random_range(0..m)
        };
        centers.row_mut(c).copy_from(&points.row(pick));
        for (i, b) in best.iter_mut().enumerate() {
            *b = b.min(dist2(points, i, &centers, c));
        }
    }
    centers
}

fn lloyd<R: Rng>(points: &DMatrix<f64>, k: usize, rng: &mut R) -> (Vec<usize>, f64) {
    let (m, d) = points.shape();
    let mut centers = plus_plus(points, k, rng);
    let mut labels = vec![usize::MAX; m];
    for _ in 0..MAX_ITER {
        let mut changed = false;
        for (i, label) in labels.iter_mut().enumerate() {
            let mut bc = 0;
            let mut bd = f64::INFINITY;
            for c in 0..k {
                let dd = dist2(points, i, &centers, c);
                if dd < bd {
                    bd = dd;
                    bc = c;
                }
            }
            if *label != bc {
                *label = bc;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = DMatrix::<f64>::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for j in 0..d {
                sums[(l, j)] += points[(i, j)];
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for j in 0..d {
                    centers[(c, j)] = sums[(c, j)] / counts[c] as f64;
                }
            } else {
                // revive an empty cluster at the point farthest from its center
                let far = (0..m)
                    .max_by(|&a, &b| {
                        dist2(points, a, &centers, labels[a])
                            .total_cmp(&dist2(points, b, &centers, labels[b]))
                    })
                    .unwrap_or(0);
                centers.row_mut(c).copy_from(&points.row(far));
            }
        }
    }
    let cost = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| dist2(points, i, &centers, l))
        .sum();
    (labels, cost)
}

/// Clusters the rows of `points` into `k` groups, keeping the best of
/// `restarts` seeded runs.
pub fn kmeans(points: &DMatrix<f64>, k: usize, restarts: usize, seed: u64) -> Result<Clustering> {
    let m = points.nrows();
    if k == 0 || k > m {
        return Err(Error::InvalidParameter(format!("k = {k} with {m} points")));
    }
    let runs = par::map_range(restarts.max(1), |r| {
        let mut rng = substream(seed, &[tag::KMEANS, r as u64]);
        lloyd(points, k, &mut rng)
    });
    let (labels, cost) = runs
        .into_iter()
        .reduce(|best, run| if run.1 < best.1 { run } else { best })
        .expect("at least one run");
    Ok(Clustering {
        labels: labels.into_iter().map(|l| l + 1).collect(),
        cost,
    })
}
