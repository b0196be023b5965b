//! H-functions: maps (0,1)² → (0,1), monotone in each argument, that send
//! two independent uniforms to a uniform.

mod catalog;
mod compose;

pub use catalog::{catalog, catalog_constructions, family_members, rho_grid, RHO_GRID_LEN};
pub use compose::{eval_noisy, Chain, FailureSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::special::{norm_cdf, norm_quantile};
use crate::numeric::Distribution;

/// Largest double below 1; H outputs are clamped into
/// `[f64::MIN_POSITIVE, UPPER]` so their normal scores stay finite.
pub const UPPER: f64 = 1.0 - f64::EPSILON / 2.0;

pub(crate) fn clamp_open(p: f64) -> f64 {
    p.clamp(f64::MIN_POSITIVE, UPPER)
}

/// Which arguments are flipped (u ↦ 1 − u) before the positive-association
/// map is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Association {
    Positive,
    Negative,
    SimpsonX,
    SimpsonY,
}

impl Association {
    pub const ALL: [Association; 4] = [
        Association::Positive,
        Association::Negative,
        Association::SimpsonX,
        Association::SimpsonY,
    ];

    /// (flip x, flip y)
    pub fn flips(self) -> (bool, bool) {
        match self {
            Association::Positive => (false, false),
            Association::Negative => (true, true),
            Association::SimpsonX => (true, false),
            Association::SimpsonY => (false, true),
        }
    }

    pub fn transform(self, x: f64, y: f64) -> (f64, f64) {
        let (fx, fy) = self.flips();
        (if fx { 1.0 - x } else { x }, if fy { 1.0 - y } else { y })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", content = "parameters", rename_all = "snake_case")]
pub enum Construction {
    /// H(x, y) = F12(F1⁻¹(x) + F2⁻¹(y)) with F12 the convolution of F1 and F2.
    ConvolutionPair {
        f1: Distribution,
        f2: Distribution,
        f12: Distribution,
    },
    /// H(x, y) = Φ_{1+ρ²}(Φ⁻¹(x) + Φ_{ρ²}⁻¹(y)).
    NormalRho { rho: f64 },
    /// H(x, y) = x (axis 1) or y (axis 2).
    Projection { axis: u8 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HFunction {
    #[serde(flatten)]
    pub construction: Construction,
    pub association: Association,
}

/// Coarse classification used to restrict refits to "the same family".
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    NormalRho,
    Projection,
    ConvolutionPair(&'static str, &'static str),
}

fn kind_name(d: &Distribution) -> &'static str {
    match d {
        Distribution::Normal { .. } => "normal",
        Distribution::Exponential { .. } => "exponential",
        Distribution::Gamma { .. } => "gamma",
        Distribution::Uniform { .. } => "uniform",
        Distribution::NegGamma { .. } => "neg_gamma",
        Distribution::Triangular { .. } => "triangular",
        Distribution::Tabulated(_) => "tabulated",
        Distribution::Empirical(_) => "empirical",
    }
}

impl HFunction {
    pub fn new(construction: Construction, association: Association) -> Result<Self> {
        let h = HFunction {
            construction,
            association,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn normal_rho(rho: f64, association: Association) -> Result<Self> {
        Self::new(Construction::NormalRho { rho }, association)
    }

    pub fn projection(axis: u8, association: Association) -> Result<Self> {
        Self::new(Construction::Projection { axis }, association)
    }

    /// Convolution pair with an analytically known F12.
    pub fn convolution(
        f1: Distribution,
        f2: Distribution,
        f12: Distribution,
        association: Association,
    ) -> Result<Self> {
        Self::new(Construction::ConvolutionPair { f1, f2, f12 }, association)
    }

    /// Convolution pair whose F12 is obtained by numeric quadrature.
    pub fn numeric_convolution(
        f1: Distribution,
        f2: Distribution,
        association: Association,
    ) -> Result<Self> {
        let f12 = Distribution::convolve(&f1, &f2, 4096)?;
        Self::convolution(f1, f2, f12, association)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.construction {
            Construction::NormalRho { rho } => {
                if rho.is_finite() && *rho > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")))
                }
            }
            Construction::Projection { axis } => {
                if *axis == 1 || *axis == 2 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("projection axis {axis}")))
                }
            }
            Construction::ConvolutionPair { f1, f2, f12 } => {
                f1.validate()?;
                f2.validate()?;
                f12.validate()
            }
        }
    }

    pub fn family(&self) -> Family {
        match &self.construction {
            Construction::NormalRho { .. } => Family::NormalRho,
            Construction::Projection { .. } => Family::Projection,
            Construction::ConvolutionPair { f1, f2, .. } => {
                Family::ConvolutionPair(kind_name(f1), kind_name(f2))
            }
        }
    }

    /// Short human-readable label, e.g. `normal_rho(1)/negative`.
    pub fn label(&self) -> String {
        let c = match &self.construction {
            Construction::NormalRho { rho } => format!("normal_rho({rho:.4})"),
            Construction::Projection { axis } => format!("projection({axis})"),
            Construction::ConvolutionPair { f1, f2, .. } => {
                format!("convolution({}, {})", kind_name(f1), kind_name(f2))
            }
        };
        let a = match self.association {
            Association::Positive => "positive",
            Association::Negative => "negative",
            Association::SimpsonX => "simpson_x",
            Association::SimpsonY => "simpson_y",
        };
        format!("{c}/{a}")
    }

    /// Per-axis transform of the (already association-flipped) first argument.
    fn axis1(&self, x: f64) -> f64 {
        match &self.construction {
            Construction::NormalRho { .. } => norm_quantile(x),
            Construction::Projection { .. } => x,
            Construction::ConvolutionPair { f1, .. } => f1.ppf(x),
        }
    }

    fn axis2(&self, y: f64) -> f64 {
        match &self.construction {
            Construction::NormalRho { rho } => rho * norm_quantile(y),
            Construction::Projection { .. } => y,
            Construction::ConvolutionPair { f2, .. } => f2.ppf(y),
        }
    }

    fn combine(&self, a: f64, b: f64) -> f64 {
        let p = match &self.construction {
            Construction::NormalRho { rho } => norm_cdf((a + b) / (1.0 + rho * rho).sqrt()),
            Construction::Projection { axis } => {
                if *axis == 1 {
                    a
                } else {
                    b
                }
            }
            Construction::ConvolutionPair { f12, .. } => f12.cdf(a + b),
        };
        clamp_open(p)
    }

    /// H(x, y) without argument checks.
    pub fn eval_unchecked(&self, x: f64, y: f64) -> f64 {
        let (x, y) = self.association.transform(x, y);
        self.combine(self.axis1(x), self.axis2(y))
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        for v in [x, y] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!("H argument {v} outside (0, 1)")));
            }
        }
        Ok(self.eval_unchecked(x, y))
    }

    /// Row-major `xs.len() × ys.len()` grid of H values. Each argument is
    /// transformed once, so this is much cheaper than repeated `eval`.
    pub fn eval_grid(&self, xs: &[f64], ys: &[f64]) -> Vec<f64> {
        let (fx, fy) = self.association.flips();
        let ax: Vec<f64> = xs
            .iter()
            .map(|&x| self.axis1(if fx { 1.0 - x } else { x }))
            .collect();
        let by: Vec<f64> = ys
            .iter()
            .map(|&y| self.axis2(if fy { 1.0 - y } else { y }))
            .collect();
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for &a in &ax {
            for &b in &by {
                out.push(self.combine(a, b));
            }
        }
        out
    }

    /// Like `eval_grid` but returns normal scores Φ⁻¹(H). For NormalRho the
    /// score is the linear form itself, clamped to the range of scores of
    /// clamped H values.
    pub fn score_grid(&self, xs: &[f64], ys: &[f64]) -> Vec<f64> {
        match &self.construction {
            Construction::NormalRho { rho } => {
                let (fx, fy) = self.association.flips();
                let lo = norm_quantile(f64::MIN_POSITIVE);
                let hi = norm_quantile(UPPER);
                let k = 1.0 / (1.0 + rho * rho).sqrt();
                let ax: Vec<f64> = xs
                    .iter()
                    .map(|&x| k * norm_quantile(if fx { 1.0 - x } else { x }))
                    .collect();
                let by: Vec<f64> = ys
                    .iter()
                    .map(|&y| k * rho * norm_quantile(if fy { 1.0 - y } else { y }))
                    .collect();
                let mut out = Vec::with_capacity(xs.len() * ys.len());
                for &a in &ax {
                    for &b in &by {
                        out.push((a + b).clamp(lo, hi));
                    }
                }
                out
            }
            _ => self.eval_grid(xs, ys).into_iter().map(norm_quantile).collect(),
        }
    }

    /// Normal score Φ⁻¹(H(x, y)), consistent with `score_grid`.
    pub fn score(&self, x: f64, y: f64) -> f64 {
        self.score_grid(&[x], &[y])[0]
    }
}
