//! Networks, community assignments, fitted models and generator specs.

pub mod io;
mod network;

pub use network::{validate, Violation, WeightedNetwork};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hfunc::HFunction;
use crate::numeric::special::{norm_cdf, norm_quantile};
use crate::numeric::{Distribution, EmpiricalCdf};

/// Number of unordered community pairs `i ≤ j` for `k` communities.
pub fn pair_count(k: usize) -> usize {
    k * (k + 1) / 2
}

/// Position of the pair `(i, j)` (1-based labels, any order) in the
/// row-major upper-triangle enumeration (1,1), (1,2), …, (1,K), (2,2), ….
pub fn pair_index(k: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    let r = i - 1;
    r * k - r * (r.saturating_sub(1)) / 2 + (j - i)
}

/// All unordered pairs in `pair_index` order.
pub fn pairs(k: usize) -> Vec<(usize, usize)> {
    (1..=k).flat_map(|i| (i..=k).map(move |j| (i, j))).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct AssignmentRepr {
    labels: Vec<usize>,
    k: usize,
}

/// Community label (1..=K) of every node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AssignmentRepr", into = "AssignmentRepr")]
pub struct CommunityAssignment {
    labels: Vec<usize>,
    k: usize,
    members: Vec<Vec<usize>>,
}

impl TryFrom<AssignmentRepr> for CommunityAssignment {
    type Error = Error;
    fn try_from(r: AssignmentRepr) -> Result<Self> {
        let a = CommunityAssignment::new(r.labels)?;
        if a.k != r.k {
            return Err(Error::InvalidParameter(format!(
                "assignment declares k = {} but labels use {}",
                r.k, a.k
            )));
        }
        Ok(a)
    }
}

impl From<CommunityAssignment> for AssignmentRepr {
    fn from(a: CommunityAssignment) -> Self {
        AssignmentRepr {
            labels: a.labels,
            k: a.k,
        }
    }
}

impl CommunityAssignment {
    /// K is the largest label; every label in 1..=K must be used.
    pub fn new(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Empty("assignment has no nodes"));
        }
        if let Some(u) = labels.iter().position(|&l| l == 0) {
            return Err(Error::InvalidParameter(format!("node {u} has label 0; labels start at 1")));
        }
        let k = *labels.iter().max().expect("non-empty");
        let mut members = vec![Vec::new(); k];
        for (u, &l) in labels.iter().enumerate() {
            members[l - 1].push(u);
        }
        if let Some(c) = members.iter().position(|m| m.is_empty()) {
            return Err(Error::InvalidParameter(format!("community {} is empty", c + 1)));
        }
        Ok(CommunityAssignment { labels, k, members })
    }

    /// Relabels arbitrary ids by order of first appearance.
    pub fn from_raw(ids: &[usize]) -> Result<Self> {
        let mut seen: Vec<usize> = Vec::new();
        let labels = ids
            .iter()
            .map(|id| match seen.iter().position(|s| s == id) {
                Some(p) => p + 1,
                None => {
                    seen.push(*id);
                    seen.len()
                }
            })
            .collect();
        Self::new(labels)
    }

    pub fn single(n: usize) -> Result<Self> {
        Self::new(vec![1; n])
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, u: usize) -> usize {
        self.labels[u]
    }

    /// Nodes of community `i` (1-based) in increasing order.
    pub fn members(&self, i: usize) -> &[usize] {
        &self.members[i - 1]
    }

    pub fn size(&self, i: usize) -> usize {
        self.members[i - 1].len()
    }

    /// Position of node `u` within its community's member list.
    pub fn position(&self, u: usize) -> usize {
        let m = &self.members[self.labels[u] - 1];
        m.binary_search(&u).expect("node is a member of its community")
    }
}

/// Parameters of a linear sociability fit for one block. `z_i` / `z_j` are
/// standardized sociability scores of the row and column communities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LsmFit {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub z_i: Vec<f64>,
    pub z_j: Vec<f64>,
    /// Residual SD in the weight scale.
    pub sigma: f64,
    #[serde(default)]
    pub family_i: ScoreFamily,
    #[serde(default)]
    pub family_j: ScoreFamily,
}

/// Distribution family of the standardized sociability scores h(Ψ).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreFamily {
    #[default]
    Normal,
    Exponential,
    ReflectedExponential,
    Uniform,
}

impl ScoreFamily {
    pub const ALL: [ScoreFamily; 4] = [
        ScoreFamily::Normal,
        ScoreFamily::Exponential,
        ScoreFamily::ReflectedExponential,
        ScoreFamily::Uniform,
    ];

    /// Standardized (mean 0, variance 1) quantile function.
    pub fn quantile(self, p: f64) -> f64 {
        match self {
            ScoreFamily::Normal => norm_quantile(p),
            ScoreFamily::Exponential => -(-p).ln_1p() - 1.0,
            ScoreFamily::ReflectedExponential => p.ln() + 1.0,
            ScoreFamily::Uniform => SQRT_12 * (p - 0.5),
        }
    }

    /// CDF of the standardized family.
    pub fn cdf(self, z: f64) -> f64 {
        match self {
            ScoreFamily::Normal => norm_cdf(z),
            ScoreFamily::Exponential => {
                if z <= -1.0 {
                    0.0
                } else {
                    -(-(z + 1.0)).exp_m1()
                }
            }
            ScoreFamily::ReflectedExponential => (z - 1.0).min(0.0).exp(),
            ScoreFamily::Uniform => (z / SQRT_12 + 0.5).clamp(0.0, 1.0),
        }
    }
}

const SQRT_12: f64 = 3.464_101_615_137_754_6;

/// Fitted model of the block between communities `i ≤ j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    pub i: usize,
    pub j: usize,
    pub g_hat: EmpiricalCdf,
    pub h_hat: HFunction,
    pub sigma_hat: f64,
    /// Ψ̂ of community `i`'s members (in member order) with respect to `j`.
    pub psi_i_wrt_j: Vec<f64>,
    /// Ψ̂ of community `j`'s members with respect to `i`; equals
    /// `psi_i_wrt_j` for within-community blocks.
    pub psi_j_wrt_i: Vec<f64>,
    pub mse: f64,
    pub spurious: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lsm_fit: Option<LsmFit>,
    /// Too few nodes or edges for a sociability fit; the block is modelled
    /// by its median weight.
    #[serde(default)]
    pub degenerate: bool,
    /// Global indices of nodes without usable edges in this block (Ψ̂ = 0.5).
    #[serde(default)]
    pub flagged_nodes: Vec<usize>,
}

impl PairModel {
    pub fn is_within(&self) -> bool {
        self.i == self.j
    }

    /// True when edges of this block should be replaced by the median weight
    /// instead of the smooth estimate.
    pub fn medianized(&self) -> bool {
        self.spurious || self.degenerate
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("pair ({}, {}): {what}", self.i, self.j)));
        if self.i > self.j || self.i == 0 {
            return bad("labels must satisfy 1 <= i <= j");
        }
        if self
            .psi_i_wrt_j
            .iter()
            .chain(&self.psi_j_wrt_i)
            .any(|&p| !(p > 0.0 && p < 1.0))
        {
            return bad("psi outside (0, 1)");
        }
        if !(self.mse >= 0.0) {
            return bad("negative mse");
        }
        if !(self.sigma_hat >= 0.0) {
            return bad("negative sigma");
        }
        self.h_hat.validate()
    }
}

/// A fitted model for the whole network: one `PairModel` per unordered pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub assignment: CommunityAssignment,
    pub pairs: Vec<PairModel>,
}

impl FittedModel {
    pub fn new(assignment: CommunityAssignment, pairs: Vec<PairModel>) -> Result<Self> {
        let m = FittedModel { assignment, pairs };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.assignment.k();
        if self.pairs.len() != pair_count(k) {
            return Err(Error::Dimension(format!(
                "{} pair models for {k} communities",
                self.pairs.len()
            )));
        }
        for (idx, (i, j)) in pairs(k).into_iter().enumerate() {
            let p = &self.pairs[idx];
            if (p.i, p.j) != (i, j) {
                return Err(Error::InvalidParameter(format!(
                    "pair model {idx} is ({}, {}), expected ({i}, {j})",
                    p.i, p.j
                )));
            }
            p.validate()?;
            let (ni, nj) = (self.assignment.size(i), self.assignment.size(j));
            if p.psi_i_wrt_j.len() != ni || p.psi_j_wrt_i.len() != nj {
                return Err(Error::Dimension(format!("pair ({i}, {j}) psi lengths")));
            }
        }
        Ok(())
    }

    pub fn pair(&self, i: usize, j: usize) -> &PairModel {
        &self.pairs[pair_index(self.assignment.k(), i, j)]
    }

    /// Ψ̂ of node `u` with respect to community `j`.
    pub fn psi(&self, u: usize, j: usize) -> f64 {
        let i = self.assignment.label(u);
        let pos = self.assignment.position(u);
        let p = self.pair(i, j);
        if i <= j {
            p.psi_i_wrt_j[pos]
        } else {
            p.psi_j_wrt_i[pos]
        }
    }
}

/// Generation parameters of one community pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    pub i: usize,
    pub j: usize,
    pub h: HFunction,
    pub sigma: f64,
    pub marginal: Distribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_noise_sd: Option<f64>,
    /// Edge-retention probability of the sparsifier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retention: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PsiMode {
    /// Ψ_u i.i.d. U(0,1), drawn from a stream keyed by `seed` and the node.
    IidUniform { seed: u64 },
    /// `grids[i - 1]` lists Ψ for the members of community `i` in order.
    Explicit { grids: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub assignment: CommunityAssignment,
    pub pairs: Vec<PairSpec>,
    pub psi_mode: PsiMode,
}

impl GeneratorSpec {
    /// Every broken invariant, as readable messages.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let k = self.assignment.k();
        let mut seen = vec![false; pair_count(k)];
        for p in &self.pairs {
            let tag = format!("pair ({}, {})", p.i, p.j);
            if p.i == 0 || p.i > p.j || p.j > k {
                out.push(format!("{tag}: labels must satisfy 1 <= i <= j <= {k}"));
                continue;
            }
            let idx = pair_index(k, p.i, p.j);
            if seen[idx] {
                out.push(format!("{tag}: listed twice"));
            }
            seen[idx] = true;
            if !(p.sigma.is_finite() && p.sigma >= 0.0) {
                out.push(format!("{tag}: sigma {} must be >= 0", p.sigma));
            }
            if let Some(sd) = p.external_noise_sd {
                if !(sd.is_finite() && sd >= 0.0) {
                    out.push(format!("{tag}: external noise sd {sd} must be >= 0"));
                }
            }
            if let Some(r) = p.retention {
                if !(0.0..=1.0).contains(&r) {
                    out.push(format!("{tag}: retention {r} outside [0, 1]"));
                }
            }
            if let Err(e) = p.h.validate() {
                out.push(format!("{tag}: {e}"));
            }
            if let Err(e) = p.marginal.validate() {
                out.push(format!("{tag}: {e}"));
            }
        }
        for (idx, (i, j)) in pairs(k).into_iter().enumerate() {
            if !seen[idx] {
                out.push(format!("pair ({i}, {j}) has no parameters"));
            }
        }
        if let PsiMode::Explicit { grids } = &self.psi_mode {
            if grids.len() != k {
                out.push(format!("{} psi grids for {k} communities", grids.len()));
            } else {
                for (c, g) in grids.iter().enumerate() {
                    if g.len() != self.assignment.size(c + 1) {
                        out.push(format!(
                            "psi grid {} has {} values for {} members",
                            c + 1,
                            g.len(),
                            self.assignment.size(c + 1)
                        ));
                    }
                    if let Some(p) = g.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
                        out.push(format!("psi grid {}: value {p} outside (0, 1)", c + 1));
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<&PairSpec> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.pairs.iter().find(|p| p.i == i && p.j == j)
    }
}
