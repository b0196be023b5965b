//! Continuous distributions used as marginals and as the building blocks of
//! convolution H-functions.

use rand::Rng;
use rand_distr::{Distribution as _, Exp, Gamma, Normal};
use serde::{Deserialize, Serialize};

use super::empirical::EmpiricalCdf;
use super::special::{
    gamma_p, gamma_p_inv, gamma_q, gamma_q_inv, norm_cdf, norm_quantile,
};
use crate::error::{Error, Result};

/// A CDF tabulated on an increasing grid, linearly interpolated. Produced by
/// numeric convolution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tabulated {
    pub xs: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl Tabulated {
    fn eval(&self, x: f64) -> f64 {
        let (xs, cs) = (&self.xs, &self.cdf);
        if x <= xs[0] {
            return cs[0];
        }
        if x >= xs[xs.len() - 1] {
            return cs[cs.len() - 1];
        }
        let i = xs.partition_point(|&v| v <= x) - 1;
        let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
        cs[i] + t * (cs[i + 1] - cs[i])
    }

    fn inverse(&self, p: f64) -> f64 {
        let (xs, cs) = (&self.xs, &self.cdf);
        let i = cs.partition_point(|&c| c < p);
        if i == 0 {
            return xs[0];
        }
        if i == cs.len() {
            return xs[xs.len() - 1];
        }
        let span = cs[i] - cs[i - 1];
        if span <= 0.0 {
            return xs[i];
        }
        xs[i - 1] + (p - cs[i - 1]) / span * (xs[i] - xs[i - 1])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Normal { mean: f64, variance: f64 },
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    Uniform { lo: f64, hi: f64 },
    /// The negative of a Gamma(shape, rate) variable, supported on x < 0.
    /// Shape 1/2 gives the half-gamma density `(-x)^(-1/2) e^x / Γ(1/2)`;
    /// two of those convolve to shape 1, whose CDF is `e^z` for z < 0.
    NegGamma { shape: f64, rate: f64 },
    Triangular { lo: f64, mode: f64, hi: f64 },
    Tabulated(Tabulated),
    Empirical(EmpiricalCdf),
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// A uniform draw in the open interval (0, 1).
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    ((rng.random::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

impl Distribution {
    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        positive("variance", variance)?;
        Ok(Distribution::Normal { mean, variance })
    }

    pub fn standard_normal() -> Self {
        Distribution::Normal {
            mean: 0.0,
            variance: 1.0,
        }
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        Ok(Distribution::Exponential { rate })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        positive("shape", shape)?;
        positive("rate", rate)?;
        Ok(Distribution::Gamma { shape, rate })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let d = Distribution::Uniform { lo, hi };
        d.validate()?;
        Ok(d)
    }

    pub fn neg_gamma(shape: f64, rate: f64) -> Result<Self> {
        positive("shape", shape)?;
        positive("rate", rate)?;
        Ok(Distribution::NegGamma { shape, rate })
    }

    pub fn triangular(lo: f64, mode: f64, hi: f64) -> Result<Self> {
        let d = Distribution::Triangular { lo, mode, hi };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Distribution::Normal { mean, variance } => {
                if !mean.is_finite() {
                    return Err(Error::InvalidParameter(format!("mean {mean}")));
                }
                positive("variance", *variance)
            }
            Distribution::Exponential { rate } => positive("rate", *rate),
            Distribution::Gamma { shape, rate } | Distribution::NegGamma { shape, rate } => {
                positive("shape", *shape)?;
                positive("rate", *rate)
            }
            Distribution::Uniform { lo, hi } => {
                if lo.is_finite() && hi.is_finite() && lo < hi {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("uniform bounds [{lo}, {hi}]")))
                }
            }
            Distribution::Triangular { lo, mode, hi } => {
                if lo.is_finite() && hi.is_finite() && lo < hi && *lo <= *mode && *mode <= *hi {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "triangular ({lo}, {mode}, {hi})"
                    )))
                }
            }
            Distribution::Tabulated(t) => {
                let ok = t.xs.len() >= 2
                    && t.xs.len() == t.cdf.len()
                    && t.xs.windows(2).all(|w| w[0] < w[1])
                    && t.cdf.windows(2).all(|w| w[0] <= w[1])
                    && t.cdf.iter().all(|c| (0.0..=1.0).contains(c));
                if ok {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("malformed tabulated cdf".into()))
                }
            }
            Distribution::Empirical(e) => {
                if e.is_empty() {
                    Err(Error::Empty("empirical distribution"))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Normal { mean, variance } => norm_cdf((x - mean) / variance.sqrt()),
            Distribution::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Distribution::Gamma { shape, rate } => gamma_p(*shape, rate * x),
            Distribution::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Distribution::NegGamma { shape, rate } => {
                if x >= 0.0 {
                    1.0
                } else {
                    gamma_q(*shape, -rate * x)
                }
            }
            Distribution::Triangular { lo, mode, hi } => {
                if x <= *lo {
                    0.0
                } else if x >= *hi {
                    1.0
                } else if x <= *mode {
                    (x - lo).powi(2) / ((hi - lo) * (mode - lo))
                } else {
                    1.0 - (hi - x).powi(2) / ((hi - lo) * (hi - mode))
                }
            }
            Distribution::Tabulated(t) => t.eval(x),
            Distribution::Empirical(e) => e.cdf(x),
        }
    }

    /// Quantile without a domain check: returns the support end points at 0
    /// and 1 and NaN outside [0, 1].
    pub fn ppf(&self, p: f64) -> f64 {
        if p.is_nan() || !(0.0..=1.0).contains(&p) {
            return f64::NAN;
        }
        match self {
            Distribution::Normal { mean, variance } => mean + variance.sqrt() * norm_quantile(p),
            Distribution::Exponential { rate } => -(-p).ln_1p() / rate,
            Distribution::Gamma { shape, rate } => gamma_p_inv(*shape, p) / rate,
            Distribution::Uniform { lo, hi } => lo + p * (hi - lo),
            Distribution::NegGamma { shape, rate } => -gamma_q_inv(*shape, p) / rate,
            Distribution::Triangular { lo, mode, hi } => {
                let split = (mode - lo) / (hi - lo);
                if p <= split {
                    lo + (p * (hi - lo) * (mode - lo)).sqrt()
                } else {
                    hi - ((1.0 - p) * (hi - lo) * (hi - mode)).sqrt()
                }
            }
            Distribution::Tabulated(t) => t.inverse(p),
            Distribution::Empirical(e) => e.nearest_value(norm_quantile(p)),
        }
    }

    /// F⁻¹(p) for p in the open unit interval.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if p > 0.0 && p < 1.0 {
            Ok(self.ppf(p))
        } else {
            Err(Error::Domain(format!("quantile argument {p} outside (0, 1)")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Distribution::Normal { mean, variance } => Normal::new(*mean, variance.sqrt())
                .expect("validated normal")
                .sample(rng),
            Distribution::Exponential { rate } => Exp::new(*rate).expect("validated rate").sample(rng),
            Distribution::Gamma { shape, rate } => Gamma::new(*shape, 1.0 / rate)
                .expect("validated gamma")
                .sample(rng),
            Distribution::NegGamma { shape, rate } => -Gamma::new(*shape, 1.0 / rate)
                .expect("validated gamma")
                .sample(rng),
            _ => self.ppf(open_unit(rng)),
        }
    }

    /// CDF of X + Y for independent X ~ `a`, Y ~ `b`, by quadrature over the
    /// quantile scale of `a` and tabulation on `points` grid points.
    pub fn convolve(a: &Distribution, b: &Distribution, points: usize) -> Result<Distribution> {
        a.validate()?;
        b.validate()?;
        if points < 16 {
            return Err(Error::InvalidParameter(format!("{points} convolution points")));
        }
        const TAIL: f64 = 1e-8;
        let lo = a.ppf(TAIL) + b.ppf(TAIL);
        let hi = a.ppf(1.0 - TAIL) + b.ppf(1.0 - TAIL);
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter("convolution range is degenerate".into()));
        }
        // F12(z) = ∫_0^1 F2(z − F1⁻¹(t)) dt, midpoint rule in t
        let xa: Vec<f64> = (0..points)
            .map(|k| a.ppf((k as f64 + 0.5) / points as f64))
            .collect();
        let xs: Vec<f64> = (0..points)
            .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
            .collect();
        let cdf: Vec<f64> = crate::par::map_slice(&xs, |&z| {
            xa.iter().map(|&x| b.cdf(z - x)).sum::<f64>() / points as f64
        });
        Ok(Distribution::Tabulated(Tabulated { xs, cdf }))
    }
}
