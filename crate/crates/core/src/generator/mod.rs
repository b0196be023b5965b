//! Sampling networks from sociability models.

pub mod presets;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hfunc::clamp_open;
use crate::model::{
    pair_count, pair_index, CommunityAssignment, GeneratorSpec, PsiMode, ScoreFamily,
    WeightedNetwork,
};
use crate::numeric::open_unit;
use crate::numeric::special::{norm_cdf, norm_quantile};
use crate::par;
use crate::rng::{substream, tag};

/// Ψ of every node under `mode`.
pub fn draw_psi(assignment: &CommunityAssignment, mode: &PsiMode) -> Vec<f64> {
    match mode {
        PsiMode::IidUniform { seed } => (0..assignment.n())
            .map(|u| open_unit(&mut substream(*seed, &[tag::PSI, u as u64])))
            .collect(),
        PsiMode::Explicit { grids } => {
            let mut psi = vec![0.0; assignment.n()];
            for (c, g) in grids.iter().enumerate() {
                for (&u, &p) in assignment.members(c + 1).iter().zip(g) {
                    psi[u] = p;
                }
            }
            psi
        }
    }
}

/// One row of one block: node `u` of community `i` against `cols` in `j`.
struct RowTask<'a> {
    i: usize,
    j: usize,
    u: usize,
    cols: &'a [usize],
}

fn row_tasks(assignment: &CommunityAssignment) -> Vec<RowTask<'_>> {
    let k = assignment.k();
    let mut tasks = Vec::new();
    for i in 1..=k {
        let mi = assignment.members(i);
        for (x, &u) in mi.iter().enumerate() {
            tasks.push(RowTask {
                i,
                j: i,
                u,
                cols: &mi[x + 1..],
            });
            for j in i + 1..=k {
                tasks.push(RowTask {
                    i,
                    j,
                    u,
                    cols: assignment.members(j),
                });
            }
        }
    }
    tasks
}

fn assemble(n: usize, tasks: &[RowTask<'_>], rows: Vec<Vec<f64>>) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(n, n);
    for (t, row) in tasks.iter().zip(rows) {
        for (&v, x) in t.cols.iter().zip(row) {
            w[(t.u, v)] = x;
            w[(v, t.u)] = x;
        }
    }
    w
}

/// Draws an H-Normal network. Returns the network and the true Ψ of every
/// node. External noise and sparsification listed in the spec are applied
/// afterwards, each from its own stream.
pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<(WeightedNetwork, Vec<f64>)> {
    spec.validate()?;
    let a = &spec.assignment;
    let k = a.k();
    let psi = draw_psi(a, &spec.psi_mode);
    let mut by_pair = vec![None; pair_count(k)];
    for p in &spec.pairs {
        by_pair[pair_index(k, p.i, p.j)] = Some(p);
    }
    let tasks = row_tasks(a);
    let rows = par::map_slice(&tasks, |t| {
        let p = by_pair[pair_index(k, t.i, t.j)].expect("validated");
        let mut rng = substream(seed, &[tag::EPSILON, t.i as u64, t.j as u64, t.u as u64]);
        let s = (1.0 + p.sigma * p.sigma).sqrt();
        t.cols
            .iter()
            .map(|&v| {
                let h = p.h.eval_unchecked(psi[t.u], psi[v]);
                let q = if p.sigma == 0.0 {
                    h
                } else {
                    let eps: f64 = rng.sample(StandardNormal);
                    clamp_open(norm_cdf((norm_quantile(h) + p.sigma * eps) / s))
                };
                p.marginal.ppf(q)
            })
            .collect::<Vec<f64>>()
    });
    let mut net = WeightedNetwork::new(assemble(a.n(), &tasks, rows))?;

    let sds: Vec<f64> = (0..pair_count(k))
        .map(|idx| by_pair[idx].and_then(|p| p.external_noise_sd).unwrap_or(0.0))
        .collect();
    if sds.iter().any(|&s| s > 0.0) {
        net = add_external_noise(&net, a, &sds, seed)?;
    }
    let keep: Vec<f64> = (0..pair_count(k))
        .map(|idx| by_pair[idx].and_then(|p| p.retention).unwrap_or(1.0))
        .collect();
    if keep.iter().any(|&r| r < 1.0) {
        net = sparsify(&net, a, &keep, seed)?;
    }
    Ok((net, psi))
}

/// Inverse link applied to the linear predictor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    #[default]
    Identity,
    /// W = exp(x), i.e. f = log.
    Exp,
}

impl Link {
    pub fn inverse(self, x: f64) -> f64 {
        match self {
            Link::Identity => x,
            Link::Exp => x.exp(),
        }
    }

    pub fn forward(self, w: f64) -> f64 {
        match self {
            Link::Identity => w,
            Link::Exp => w.ln(),
        }
    }
}

/// Linear sociability parameters of one block: f(W_uv) = γ + α·h1(Ψ_u) +
/// β·h2(Ψ_v) + σε, with u in `i` and v in `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsmPairSpec {
    pub i: usize,
    pub j: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub h1: ScoreFamily,
    #[serde(default)]
    pub h2: ScoreFamily,
    pub sigma: f64,
    #[serde(default)]
    pub link: Link,
}

/// Draws a linear sociability network. Returns the network and true Ψ.
pub fn generate_lsm(
    assignment: &CommunityAssignment,
    pairs: &[LsmPairSpec],
    psi_mode: &PsiMode,
    seed: u64,
) -> Result<(WeightedNetwork, Vec<f64>)> {
    let k = assignment.k();
    let mut by_pair = vec![None; pair_count(k)];
    for p in pairs {
        if p.i == 0 || p.i > p.j || p.j > k {
            return Err(Error::InvalidParameter(format!("lsm pair ({}, {})", p.i, p.j)));
        }
        if p.i == p.j && (p.alpha != p.beta || p.h1 != p.h2) {
            return Err(Error::InvalidParameter(format!(
                "within-community pair ({0}, {0}) needs alpha == beta and h1 == h2",
                p.i
            )));
        }
        if !(p.sigma.is_finite() && p.sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!("sigma = {}", p.sigma)));
        }
        by_pair[pair_index(k, p.i, p.j)] = Some(p);
    }
    if let Some(idx) = by_pair.iter().position(Option::is_none) {
        let (i, j) = crate::model::pairs(k)[idx];
        return Err(Error::InvalidParameter(format!("pair ({i}, {j}) has no parameters")));
    }
    let psi = draw_psi(assignment, psi_mode);
    let tasks = row_tasks(assignment);
    let rows = par::map_slice(&tasks, |t| {
        let p = by_pair[pair_index(k, t.i, t.j)].expect("checked");
        let mut rng = substream(seed, &[tag::EPSILON, t.i as u64, t.j as u64, t.u as u64]);
        let zu = p.h1.quantile(psi[t.u]);
        t.cols
            .iter()
            .map(|&v| {
                let mut x = p.gamma + p.alpha * zu + p.beta * p.h2.quantile(psi[v]);
                if p.sigma > 0.0 {
                    let eps: f64 = rng.sample(StandardNormal);
                    x += p.sigma * eps;
                }
                p.link.inverse(x)
            })
            .collect::<Vec<f64>>()
    });
    let net = WeightedNetwork::new(assemble(assignment.n(), &tasks, rows))?;
    Ok((net, psi))
}

fn per_pair_check(values: &[f64], k: usize, what: &str, ok: impl Fn(f64) -> bool) -> Result<()> {
    if values.len() != pair_count(k) {
        return Err(Error::Dimension(format!(
            "{} {what} values for {} pairs",
            values.len(),
            pair_count(k)
        )));
    }
    if let Some(v) = values.iter().find(|&&v| !ok(v)) {
        return Err(Error::InvalidParameter(format!("{what} {v}")));
    }
    Ok(())
}

/// Keeps each present off-diagonal pair independently with its block's
/// retention probability (indexed by `pair_index`); dropped pairs become
/// missing.
pub fn sparsify(
    net: &WeightedNetwork,
    assignment: &CommunityAssignment,
    retention: &[f64],
    seed: u64,
) -> Result<WeightedNetwork> {
    let k = assignment.k();
    per_pair_check(retention, k, "retention", |r| (0.0..=1.0).contains(&r))?;
    let n = net.n();
    let mut mask = net
        .missing()
        .cloned()
        .unwrap_or_else(|| DMatrix::from_element(n, n, false));
    for u in 0..n {
        let mut rng = substream(seed, &[tag::SPARSIFY, u as u64]);
        for v in u + 1..n {
            let r = retention[pair_index(k, assignment.label(u), assignment.label(v))];
            let draw: f64 = rng.random();
            if draw >= r {
                mask[(u, v)] = true;
                mask[(v, u)] = true;
            }
        }
    }
    WeightedNetwork::with_mask(net.weights().clone(), Some(mask))
}

/// Adds ζ_uv ~ N(0, sd²) to every present edge, with `sd` per block.
pub fn add_external_noise(
    net: &WeightedNetwork,
    assignment: &CommunityAssignment,
    sd: &[f64],
    seed: u64,
) -> Result<WeightedNetwork> {
    let k = assignment.k();
    per_pair_check(sd, k, "noise sd", |s| s.is_finite() && s >= 0.0)?;
    let n = net.n();
    let mut w = net.weights().clone();
    for u in 0..n {
        let mut rng = substream(seed, &[tag::EXTERNAL, u as u64]);
        for v in u + 1..n {
            let s = sd[pair_index(k, assignment.label(u), assignment.label(v))];
            let z: f64 = rng.sample(StandardNormal);
            if s > 0.0 && net.is_present(u, v) {
                let x = w[(u, v)] + s * z;
                w[(u, v)] = x;
                w[(v, u)] = x;
            }
        }
    }
    WeightedNetwork::with_mask(w, net.missing().cloned())
}
