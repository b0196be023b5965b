//! Community detection with the measure L.

mod greedy;
mod measure;
mod spectral;

pub use greedy::greedy_communities;
pub use measure::{measure_l, node_community_correlation, ClusterScore, PairTerm};
pub use spectral::{
    normalized_embedding, rbf_affinity, row_distances, spectral_communities, spectral_k, Embedding,
    DEFAULT_REPLICATES,
};

use crate::error::{Error, Result};

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index between two labelings of the same nodes. Identical
/// partitions score 1 even when the index is otherwise undefined.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("{} vs {} labels", a.len(), b.len())));
    }
    let ids = |xs: &[usize]| {
        let mut v = xs.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    };
    let (ia, ib) = (ids(a), ids(b));
    let mut table = vec![vec![0u64; ib.len()]; ia.len()];
    for (x, y) in a.iter().zip(b) {
        let r = ia.binary_search(x).expect("present");
        let c = ib.binary_search(y).expect("present");
        table[r][c] += 1;
    }
    let index: f64 = table.iter().flatten().map(|&x| choose2(x)).sum();
    let rows: f64 = table.iter().map(|r| choose2(r.iter().sum())).sum();
    let cols: f64 = (0..ib.len())
        .map(|c| choose2(table.iter().map(|r| r[c]).sum()))
        .sum();
    let total = choose2(a.len() as u64);
    let expected = if total > 0.0 { rows * cols / total } else { 0.0 };
    let max = 0.5 * (rows + cols);
    if max == expected {
        return Ok(if rows == cols && index == rows { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}
