//! Greedy agglomeration of communities driven by L.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use super::measure::l_of_groups;
use crate::error::{Error, Result};
use crate::model::{CommunityAssignment, WeightedNetwork};
use crate::numeric::stats::pearson;

struct State<'a> {
    w: &'a DMatrix<f64>,
    /// Members of each label id; merged-away labels are empty.
    groups: Vec<Vec<usize>>,
    /// Aggregate weight profile Σ_{u ∈ label} W_u· of each label.
    aggregate: Vec<Option<DVector<f64>>>,
    l: f64,
}

impl<'a> State<'a> {
    fn new(w: &'a DMatrix<f64>) -> Self {
        let n = w.nrows();
        State {
            w,
            groups: (0..n).map(|u| vec![u]).collect(),
            aggregate: (0..n).map(|u| Some(w.column(u).into_owned())).collect(),
            l: 0.0,
        }
    }

    fn alive(&self) -> Vec<usize> {
        (0..self.groups.len()).filter(|&k| !self.groups[k].is_empty()).collect()
    }

    fn corr(&self, a: usize, b: usize) -> f64 {
        let (x, y) = (self.aggregate[a].as_ref(), self.aggregate[b].as_ref());
        pearson(x.expect("alive").as_slice(), y.expect("alive").as_slice())
    }

    fn live_groups(&self) -> Vec<Vec<usize>> {
        self.groups.iter().filter(|g| !g.is_empty()).cloned().collect()
    }

    /// Moves `b` into `a` if L does not decrease.
    fn try_merge(&mut self, a: usize, b: usize) -> bool {
        let mut trial = self.groups.clone();
        let moved = std::mem::take(&mut trial[b]);
        trial[a].extend(moved);
        let merged: Vec<Vec<usize>> = trial.into_iter().filter(|g| !g.is_empty()).collect();
        let l = l_of_groups(self.w, &merged);
        if l < self.l {
            return false;
        }
        let moved = std::mem::take(&mut self.groups[b]);
        self.groups[a].extend(moved);
        let add = self.aggregate[b].take().expect("alive");
        *self.aggregate[a].as_mut().expect("alive") += add;
        self.l = l;
        true
    }

    /// One pass over labels in decreasing order of aggregate degree. Returns
    /// whether anything merged.
    fn round(&mut self) -> bool {
        let mut alive = self.alive();
        let sums: Vec<f64> = (0..self.groups.len())
            .map(|k| self.aggregate[k].as_ref().map_or(0.0, |v| v.sum()))
            .collect();
        alive.sort_by(|&x, &y| sums[y].total_cmp(&sums[x]));
        let mut order: VecDeque<usize> = alive.into();
        let mut merged = false;
        while let Some(&a) = order.front() {
            let alive = self.alive();
            if alive.len() == 1 {
                break;
            }
            let mut best: Option<(usize, f64)> = None;
            for &b in alive.iter().filter(|&&b| b != a) {
                let c = self.corr(a, b);
                if best.is_none_or(|(_, bc)| c > bc) {
                    best = Some((b, c));
                }
            }
            let (b, _) = best.expect("two live labels");
            if self.try_merge(a, b) {
                merged = true;
                // the merged label is visited again where b was scheduled
                for x in order.iter_mut() {
                    if *x == b {
                        *x = a;
                    }
                }
            }
            order.pop_front();
        }
        merged
    }

    /// Tries label pairs in decreasing correlation until one merge succeeds.
    fn sweep(&mut self) -> bool {
        let alive = self.alive();
        let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
        for (x, &a) in alive.iter().enumerate() {
            for &b in &alive[x + 1..] {
                pairs.push((a, b, self.corr(a, b)));
            }
        }
        pairs.sort_by(|p, q| q.2.total_cmp(&p.2));
        pairs.into_iter().any(|(a, b, _)| self.try_merge(a, b))
    }
}

/// Agglomerates singletons into communities: each round visits labels by
/// decreasing aggregate degree and merges the most correlated partner when L
/// does not decrease; a round without merges is followed by a sweep over all
/// pairs. Stops after a mergeless round and sweep, or at one community.
pub fn greedy_communities(net: &WeightedNetwork) -> Result<CommunityAssignment> {
    let n = net.n();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("greedy detection needs 2 nodes, got {n}")));
    }
    let mut s = State::new(net.weights());
    while s.alive().len() > 1 {
        if !s.round() && !s.sweep() {
            break;
        }
    }
    let mut labels = vec![0; n];
    for (k, g) in s.live_groups().iter().enumerate() {
        for &u in g {
            labels[u] = k;
        }
    }
    CommunityAssignment::from_raw(&labels)
}
