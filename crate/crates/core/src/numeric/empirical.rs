//! Empirical CDF with the (n + 1) denominator and tie repositioning.

use serde::{Deserialize, Serialize};

use super::special::norm_quantile;
use crate::error::{Error, Result};

/// CDF level for a run of `m` equal values with `k` values strictly below,
/// out of `n` in total. With `m = 1` this is the plain `(k + 1) / (n + 1)`.
pub fn tie_level(k: usize, m: usize, n: usize) -> f64 {
    let (k, m) = (k as f64, m as f64);
    (k + 0.5 * m + 0.5 / m) / (n as f64 + 1.0)
}

/// Rank levels of `xs` in input order: each value gets the tie-adjusted level
/// of its run among the sorted values. NaNs are not allowed.
pub fn rank_levels(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    // stable, so equal values stay in index order
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        let level = tie_level(start, end - start, n);
        for &i in &order[start..end] {
            out[i] = level;
        }
        start = end;
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Repr {
    values: Vec<f64>,
    levels: Vec<f64>,
    counts: Vec<usize>,
    n: usize,
}

/// Empirical CDF over the distinct values of a sample.
///
/// Levels are placed at `k / (n + 1)`, with runs of repeated values moved
/// toward the bottom of their span, so every level lies strictly inside
/// (0, 1) and its normal score is finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "Repr", into = "Repr")]
pub struct EmpiricalCdf {
    values: Vec<f64>,
    levels: Vec<f64>,
    counts: Vec<usize>,
    n: usize,
    scores: Vec<f64>,
}

impl From<Repr> for EmpiricalCdf {
    fn from(r: Repr) -> Self {
        let scores = r.levels.iter().map(|&l| norm_quantile(l)).collect();
        EmpiricalCdf {
            values: r.values,
            levels: r.levels,
            counts: r.counts,
            n: r.n,
            scores,
        }
    }
}

impl From<EmpiricalCdf> for Repr {
    fn from(e: EmpiricalCdf) -> Self {
        Repr {
            values: e.values,
            levels: e.levels,
            counts: e.counts,
            n: e.n,
        }
    }
}

impl EmpiricalCdf {
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("empirical_cdf needs at least one weight"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::Domain(format!("non-finite weight {w}")));
        }
        let n = weights.len();
        let mut sorted = weights.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut values = Vec::new();
        let mut counts = Vec::new();
        let mut levels = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && sorted[end] == sorted[start] {
                end += 1;
            }
            values.push(sorted[start]);
            counts.push(end - start);
            levels.push(tie_level(start, end - start, n));
            start = end;
        }
        let scores = levels.iter().map(|&l| norm_quantile(l)).collect();
        Ok(EmpiricalCdf {
            values,
            levels,
            counts,
            n,
            scores,
        })
    }

    /// A CDF over nothing, used for blocks without any edges.
    pub fn empty() -> Self {
        EmpiricalCdf {
            values: Vec::new(),
            levels: Vec::new(),
            counts: Vec::new(),
            n: 0,
            scores: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Normal scores of the levels.
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Number of source observations (with multiplicity).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Index of the largest distinct value not exceeding `w`.
    fn floor_index(&self, w: f64) -> Option<usize> {
        let pos = self.values.partition_point(|&v| v <= w);
        pos.checked_sub(1)
    }

    /// Ĝ(w): the level of the largest observed value `<= w`, or 0 below the
    /// smallest observation.
    pub fn cdf(&self, w: f64) -> f64 {
        self.floor_index(w).map_or(0.0, |i| self.levels[i])
    }

    /// Normal score Φ⁻¹(Ĝ(w)); `-inf` below the sample.
    pub fn score(&self, w: f64) -> f64 {
        self.floor_index(w)
            .map_or(f64::NEG_INFINITY, |i| self.scores[i])
    }

    /// Index of the distinct value whose normal score is closest to
    /// `target`, ties going to the smaller value.
    pub fn nearest_index(&self, target: f64) -> usize {
        debug_assert!(!self.is_empty());
        let s = &self.scores;
        let pos = s.partition_point(|&x| x < target);
        if pos == 0 {
            return 0;
        }
        if pos == s.len() {
            return s.len() - 1;
        }
        if (target - s[pos - 1]).abs() <= (s[pos] - target).abs() {
            pos - 1
        } else {
            pos
        }
    }

    /// argmin over observed `w` of |Φ⁻¹(Ĝ(w)) − target|.
    pub fn nearest_value(&self, target: f64) -> f64 {
        self.values[self.nearest_index(target)]
    }

    /// The observed value whose level is nearest the middle in normal space.
    pub fn median(&self) -> f64 {
        self.nearest_value(0.0)
    }

    /// Expands back to the sorted sample, repeating each value by its count.
    pub fn sample_values(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.counts)
            .flat_map(|(&v, &c)| std::iter::repeat_n(v, c))
            .collect()
    }
}
