//! The clustering measure L built from node-community correlations.

use nalgebra::DMatrix;

use crate::model::{CommunityAssignment, WeightedNetwork};
use crate::numeric::stats::{mean, pearson, sd};
use crate::par;

/// Contribution of one ordered community pair (î, ĵ) to L.
#[derive(Clone, Debug, PartialEq)]
pub struct PairTerm {
    pub i: usize,
    pub j: usize,
    /// Mean and sample SD of C_îĵ(u) over u ∈ î.
    pub mean_c: f64,
    pub sd_c: f64,
    /// ((n_î − 2)(n_ĵ − 2))₊ (1 + 1[î = ĵ]).
    pub size_factor: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterScore {
    pub l: f64,
    /// Terms of every ordered pair whose communities both have three or
    /// more members; all other pairs contribute 0.
    pub terms: Vec<PairTerm>,
}

/// d_î(v) = Σ_{u′ ∈ î, u′ ≠ v} W_u′v for every node v.
fn local_degrees(w: &DMatrix<f64>, group: &[usize]) -> Vec<f64> {
    (0..w.ncols())
        .map(|v| group.iter().filter(|&&u| u != v).map(|&u| w[(u, v)]).sum())
        .collect()
}

fn correlation(w: &DMatrix<f64>, d: &[f64], u: usize, target: &[usize]) -> f64 {
    let (xs, ys): (Vec<f64>, Vec<f64>) = target
        .iter()
        .filter(|&&v| v != u)
        .map(|&v| (d[v], w[(u, v)]))
        .unzip();
    pearson(&xs, &ys)
}

fn pair_term(w: &DMatrix<f64>, gi: &[usize], gj: &[usize], d: &[f64], i: usize, j: usize) -> PairTerm {
    let c: Vec<f64> = gi.iter().map(|&u| correlation(w, d, u, gj)).collect();
    let (mean_c, sd_c) = (mean(&c), sd(&c));
    let doubled = if i == j { 2.0 } else { 1.0 };
    let size_factor = ((gi.len() as f64 - 2.0) * (gj.len() as f64 - 2.0)).max(0.0) * doubled;
    PairTerm {
        i,
        j,
        mean_c,
        sd_c,
        size_factor,
        value: mean_c * (1.0 - sd_c.sqrt()) * size_factor,
    }
}

/// Terms of L for communities given as member lists; `groups[k]` is
/// community k + 1.
pub(crate) fn score_groups(w: &DMatrix<f64>, groups: &[Vec<usize>]) -> ClusterScore {
    let big: Vec<usize> = (0..groups.len()).filter(|&k| groups[k].len() >= 3).collect();
    let degrees: Vec<Vec<f64>> = par::map_slice(&big, |&k| local_degrees(w, &groups[k]));
    let ordered: Vec<(usize, usize)> = (0..big.len())
        .flat_map(|a| (0..big.len()).map(move |b| (a, b)))
        .collect();
    let terms = par::map_slice(&ordered, |&(a, b)| {
        let (i, j) = (big[a], big[b]);
        pair_term(w, &groups[i], &groups[j], &degrees[a], i + 1, j + 1)
    });
    ClusterScore {
        l: terms.iter().map(|t| t.value).sum(),
        terms,
    }
}

pub(crate) fn l_of_groups(w: &DMatrix<f64>, groups: &[Vec<usize>]) -> f64 {
    score_groups(w, groups).l
}

fn groups_of(assignment: &CommunityAssignment) -> Vec<Vec<usize>> {
    (1..=assignment.k()).map(|i| assignment.members(i).to_vec()).collect()
}

/// C_ij(u): Pearson correlation of (d_i(v), W_uv) over v ∈ j, v ≠ u, where
/// i is the community of `u`. Zero variance on either side gives 0.
pub fn node_community_correlation(
    net: &WeightedNetwork,
    assignment: &CommunityAssignment,
    u: usize,
    j: usize,
) -> f64 {
    let w = net.weights();
    let d = local_degrees(w, assignment.members(assignment.label(u)));
    correlation(w, &d, u, assignment.members(j))
}

/// L = Σ_î Σ_ĵ mean(C) (1 − √SD(C)) ((n_î − 2)(n_ĵ − 2))₊ (1 + 1[î = ĵ]).
pub fn measure_l(net: &WeightedNetwork, assignment: &CommunityAssignment) -> ClusterScore {
    score_groups(net.weights(), &groups_of(assignment))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn additive(z: &[f64]) -> WeightedNetwork {
        let n = z.len();
        WeightedNetwork::new(DMatrix::from_fn(n, n, |u, v| if u == v { 0.0 } else { z[u] + z[v] })).unwrap()
    }

    #[test]
    fn linear_block_correlation_is_one() {
        let z: Vec<f64> = (0..8).map(|k| (k as f64).powf(1.3)).collect();
        let net = additive(&z);
        let a = CommunityAssignment::new(vec![1, 1, 1, 1, 2, 2, 2, 2]).unwrap();
        for u in 0..8 {
            for j in 1..=2 {
                assert!((node_community_correlation(&net, &a, u, j) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_and_negated_rows() {
        let mut w = DMatrix::from_element(5, 5, 1.0);
        w.fill_diagonal(0.0);
        let net = WeightedNetwork::new(w).unwrap();
        let a = CommunityAssignment::single(5).unwrap();
        assert_eq!(node_community_correlation(&net, &a, 0, 1), 0.0);

        let z = [0.1, 0.5, 0.2, 0.9, 0.4, 0.7];
        let pos = additive(&z);
        let neg = WeightedNetwork::new(-pos.weights().clone()).unwrap();
        let a = CommunityAssignment::new(vec![1, 1, 1, 2, 2, 2]).unwrap();
        // negating every weight negates both W_uv and d_i(v)
        let c = node_community_correlation(&pos, &a, 0, 2);
        assert!((node_community_correlation(&neg, &a, 0, 2) - c).abs() < 1e-12);
    }

    #[test]
    fn small_communities_are_worthless() {
        let z: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let net = additive(&z);
        let singletons = CommunityAssignment::new((1..=10).collect()).unwrap();
        assert_eq!(measure_l(&net, &singletons).l, 0.0);
        let pairs = CommunityAssignment::new((0..10).map(|u| u / 2 + 1).collect()).unwrap();
        assert_eq!(measure_l(&net, &pairs).l, 0.0);
    }

    #[test]
    fn two_communities_of_52() {
        let z: Vec<f64> = (0..104).map(|k| (k as f64 * 0.37).sin() + k as f64 * 0.01).collect();
        let net = additive(&z);
        let a = CommunityAssignment::new((0..104).map(|u| u / 52 + 1).collect()).unwrap();
        let s = measure_l(&net, &a);
        assert_eq!(s.terms.len(), 4);
        for t in &s.terms {
            // doubled within terms match the two between terms combined
            let max = if t.i == t.j { 5000.0 } else { 2500.0 };
            assert_eq!(t.size_factor, max);
            assert!((t.value - max).abs() < 1e-4, "({}, {}) {}", t.i, t.j, t.value);
        }
        assert!((s.l - 15000.0).abs() < 1e-3, "L {}", s.l);
    }
}
