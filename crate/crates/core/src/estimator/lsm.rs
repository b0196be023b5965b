//! Linear sociability fits through rank-one factorization of exp(W).

use nalgebra::DMatrix;

use super::block::Block;
use super::nsm::normal_space_mse;
use crate::error::{Error, Result};
use crate::hfunc::{clamp_open, Association, HFunction};
use crate::model::{LsmFit, PairModel, ScoreFamily};
use crate::numeric::stats::{mean, sd};
use crate::numeric::{rank_one_factorize, Distribution, EmpiricalCdf};

/// Relative SD of a log factor below which the block counts as having no
/// sociability structure on that side.
const DEGENERATE_SD: f64 = 1e-8;

/// Fills the diagonal of a within-community block with the self-loop value
/// consistent with a linear model:
/// W_uu = [2 Σ_{v≠u} W_uv − (Σ_{v≠u} Σ_{q≠u,v} W_vq)/(n − 2)] / (n − 1).
pub fn impute_diagonal(block: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = block.nrows();
    if !block.is_square() {
        return Err(Error::Dimension(format!("{}x{} block", n, block.ncols())));
    }
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "diagonal imputation needs at least 3 nodes, got {n}"
        )));
    }
    let row: Vec<f64> = (0..n)
        .map(|u| (0..n).filter(|&v| v != u).map(|v| block[(u, v)]).sum())
        .collect();
    let total: f64 = row.iter().sum();
    let mut out = block.clone();
    let nf = n as f64;
    for u in 0..n {
        // ordered pairs (v, q), v ≠ q, neither equal to u
        let others = total - 2.0 * row[u];
        out[(u, u)] = (2.0 * row[u] - others / (nf - 2.0)) / (nf - 1.0);
    }
    Ok(out)
}

/// Result of a linear sociability fit on one block.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFit {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Standardized scores of rows and columns.
    pub z_rows: Vec<f64>,
    pub z_cols: Vec<f64>,
    pub psi_rows: Vec<f64>,
    pub psi_cols: Vec<f64>,
    /// SD of W − γ̂ − α̂Ẑ_u − β̂Ẑ_v over present edges.
    pub sigma: f64,
    pub family_rows: ScoreFamily,
    pub family_cols: ScoreFamily,
    /// A side without sociability spread (zero SD of its log factor).
    pub degenerate: bool,
}

/// Log factors (row, column) of exp(W − mean) and the centring constant.
fn log_factors(block: &Block) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let within = block.within();
    let mut m = block.weights.clone();
    let mut mask = block.mask.clone();
    if within {
        match mask.as_mut() {
            // the diagonal is simply one more unobserved entry
            Some(k) => k.fill_diagonal(true),
            None => m = impute_diagonal(&m)?,
        }
    }
    let present = block.edge_weights();
    if present.is_empty() {
        return Err(Error::Empty("block has no present edges"));
    }
    let c = mean(&present);
    let x = DMatrix::from_fn(m.nrows(), m.ncols(), |r, col| {
        if mask.as_ref().is_some_and(|k| k[(r, col)]) {
            1.0
        } else {
            (m[(r, col)] - c).exp()
        }
    });
    let f = rank_one_factorize(&x, mask.as_ref())?;
    let la: Vec<f64> = f.a.iter().map(|v| v.ln()).collect();
    let lb: Vec<f64> = if within {
        la.clone()
    } else {
        f.b.iter().map(|v| v.ln()).collect()
    };
    let shift = if within {
        // a b' = a a' · (b/a); put the common factor into the constant
        (0..la.len())
            .map(|k| f.b[k].ln() - la[k])
            .sum::<f64>()
            / la.len() as f64
    } else {
        0.0
    };
    Ok((la, lb, c + shift))
}

fn standardize(l: &[f64], scale: f64) -> Vec<f64> {
    let m = mean(l);
    l.iter().map(|&x| (x - m) / scale).collect()
}

fn finish(
    block: &Block,
    la: &[f64],
    lb: &[f64],
    c: f64,
    rows: (ScoreFamily, Vec<f64>),
    cols: (ScoreFamily, Vec<f64>),
) -> LinearFit {
    let alpha = sd(la);
    let beta = sd(lb);
    let tol = |x: &[f64]| DEGENERATE_SD * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let degenerate = !(alpha > tol(la)) || !(beta > tol(lb));
    let zero_if = |bad: bool, z: Vec<f64>| if bad { vec![0.0; z.len()] } else { z };
    let z_rows = zero_if(!(alpha > tol(la)), standardize(la, alpha));
    let z_cols = zero_if(!(beta > tol(lb)), standardize(lb, beta));
    let gamma = c + mean(la) + mean(lb);
    let resid: Vec<f64> = block
        .edges()
        .into_iter()
        .map(|(r, col)| block.weights[(r, col)] - gamma - alpha * z_rows[r] - beta * z_cols[col])
        .collect();
    let sigma = if resid.len() > 1 { sd(&resid) } else { 0.0 };
    let psi = |fam: ScoreFamily, given: Vec<f64>, z: &[f64], bad: bool| {
        if bad {
            vec![0.5; z.len()]
        } else if given.is_empty() {
            z.iter().map(|&v| clamp_open(fam.cdf(v))).collect()
        } else {
            given
        }
    };
    let psi_rows = psi(rows.0, rows.1, &z_rows, !(alpha > tol(la)));
    let psi_cols = psi(cols.0, cols.1, &z_cols, !(beta > tol(lb)));
    LinearFit {
        alpha,
        beta,
        gamma,
        z_rows,
        z_cols,
        psi_rows,
        psi_cols,
        sigma,
        family_rows: rows.0,
        family_cols: cols.0,
        degenerate,
    }
}

/// Normal-score linear fit: α̂ = SD(log a), β̂ = SD(log b), Ẑ the
/// standardized log factors and Ψ̂ = Φ(Ẑ). The sign of each Ẑ is fixed by
/// the factorization (larger factor, larger score), so a negative loading
/// shows up as reversed scores.
pub fn fit_normal_lsm(block: &Block) -> Result<LinearFit> {
    let (la, lb, c) = log_factors(block)?;
    Ok(finish(
        block,
        &la,
        &lb,
        c,
        (ScoreFamily::Normal, Vec::new()),
        (ScoreFamily::Normal, Vec::new()),
    ))
}

/// Location/scale fit of one family to a sample by maximum likelihood.
/// Endpoint estimates use the usual unbiased corrections so every sample
/// point lies strictly inside the support.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyFit {
    pub family: ScoreFamily,
    /// Mean and SD of the fitted distribution.
    pub mean: f64,
    pub sd: f64,
    pub loglik: f64,
}

impl FamilyFit {
    pub fn psi(&self, x: f64) -> f64 {
        clamp_open(self.family.cdf((x - self.mean) / self.sd))
    }
}

pub fn fit_family(xs: &[f64], family: ScoreFamily) -> FamilyFit {
    let n = xs.len() as f64;
    let m = mean(xs);
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bad = FamilyFit {
        family,
        mean: m,
        sd: 0.0,
        loglik: f64::NEG_INFINITY,
    };
    if !(hi > lo) || xs.len() < 2 {
        return bad;
    }
    match family {
        ScoreFamily::Normal => {
            let s = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt();
            let ll = -0.5 * n * (2.0 * std::f64::consts::PI * s * s).ln() - 0.5 * n;
            FamilyFit {
                family,
                mean: m,
                sd: s,
                loglik: ll,
            }
        }
        ScoreFamily::Exponential => {
            let scale = n * (m - lo) / (n - 1.0);
            let loc = lo - scale / n;
            let ll = -n * scale.ln() - xs.iter().map(|x| (x - loc) / scale).sum::<f64>();
            FamilyFit {
                family,
                mean: loc + scale,
                sd: scale,
                loglik: ll,
            }
        }
        ScoreFamily::ReflectedExponential => {
            let scale = n * (hi - m) / (n - 1.0);
            let loc = hi + scale / n;
            let ll = -n * scale.ln() - xs.iter().map(|x| (loc - x) / scale).sum::<f64>();
            FamilyFit {
                family,
                mean: loc - scale,
                sd: scale,
                loglik: ll,
            }
        }
        ScoreFamily::Uniform => {
            let pad = (hi - lo) / (n - 1.0);
            let (a, b) = (lo - pad, hi + pad);
            FamilyFit {
                family,
                mean: 0.5 * (a + b),
                sd: (b - a) / 12f64.sqrt(),
                loglik: -n * (b - a).ln(),
            }
        }
    }
}

/// Highest-likelihood family, first on ties.
pub fn select_family(xs: &[f64], families: &[ScoreFamily]) -> Result<FamilyFit> {
    let mut best: Option<FamilyFit> = None;
    for &f in families {
        let fit = fit_family(xs, f);
        if best.is_none_or(|b| fit.loglik > b.loglik) {
            best = Some(fit);
        }
    }
    best.ok_or(Error::Empty("no candidate score families"))
}

/// Linear fit with the score distribution of each side chosen among
/// `families` by likelihood; Ψ̂ inverts the selected fitted CDF.
pub fn fit_lsm_general(block: &Block, families: &[ScoreFamily]) -> Result<LinearFit> {
    if families.is_empty() {
        return Err(Error::Empty("no candidate score families"));
    }
    let (la, lb, c) = log_factors(block)?;
    let fr = select_family(&la, families)?;
    let fc = if block.within() { fr } else { select_family(&lb, families)? };
    let pr: Vec<f64> = la.iter().map(|&x| fr.psi(x)).collect();
    let pc: Vec<f64> = lb.iter().map(|&x| fc.psi(x)).collect();
    Ok(finish(block, &la, &lb, c, (fr.family, pr), (fc.family, pc)))
}

/// Distribution of `scale` times a standardized score of `family`, up to a
/// shift (shifts cancel inside a convolution H-function).
fn scaled(family: ScoreFamily, scale: f64) -> Distribution {
    match family {
        ScoreFamily::Normal => Distribution::Normal {
            mean: 0.0,
            variance: scale * scale,
        },
        ScoreFamily::Exponential => Distribution::Exponential { rate: 1.0 / scale },
        ScoreFamily::ReflectedExponential => Distribution::NegGamma {
            shape: 1.0,
            rate: 1.0 / scale,
        },
        ScoreFamily::Uniform => Distribution::Uniform {
            lo: 0.0,
            hi: scale * 12f64.sqrt(),
        },
    }
}

/// The H-function implied by a linear fit: normal scores give NormalRho
/// with ρ = β̂/α̂; other families give the convolution of the two scaled
/// score laws.
pub fn implied_h(fit: &LinearFit) -> Result<HFunction> {
    if fit.degenerate {
        return HFunction::normal_rho(1.0, Association::Positive);
    }
    if fit.family_rows == ScoreFamily::Normal && fit.family_cols == ScoreFamily::Normal {
        return HFunction::normal_rho(fit.beta / fit.alpha, Association::Positive);
    }
    HFunction::numeric_convolution(
        scaled(fit.family_rows, fit.alpha),
        scaled(fit.family_cols, fit.beta),
        Association::Positive,
    )
}

/// Expresses a linear fit as a pair model so that smoothing, MSE and the
/// bootstrap can treat every mode alike. The normal-space noise level is
/// σ̂ / √(α̂² + β̂²).
pub fn lsm_pair_model(block: &Block, fit: &LinearFit) -> Result<PairModel> {
    let g_hat = EmpiricalCdf::from_weights(&block.edge_weights())?;
    let h_hat = implied_h(fit)?;
    let scale = (fit.alpha * fit.alpha + fit.beta * fit.beta).sqrt();
    let sigma_hat = if fit.degenerate || scale == 0.0 { 0.0 } else { fit.sigma / scale };
    let mut pair = PairModel {
        i: block.i,
        j: block.j,
        g_hat,
        h_hat,
        sigma_hat,
        psi_i_wrt_j: fit.psi_rows.clone(),
        psi_j_wrt_i: fit.psi_cols.clone(),
        mse: 0.0,
        spurious: false,
        lsm_fit: Some(LsmFit {
            alpha: fit.alpha,
            beta: fit.beta,
            gamma: fit.gamma,
            z_i: fit.z_rows.clone(),
            z_j: fit.z_cols.clone(),
            sigma: fit.sigma,
            family_i: fit.family_rows,
            family_j: fit.family_cols,
        }),
        degenerate: fit.degenerate,
        flagged_nodes: Vec::new(),
    };
    pair.mse = normal_space_mse(&pair, block)?;
    Ok(pair)
}
