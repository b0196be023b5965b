//! Noise, node-failure and chained compositions of H-functions.

use serde::{Deserialize, Serialize};

use super::{clamp_open, HFunction};
use crate::error::{Error, Result};
use crate::numeric::special::{norm_cdf, norm_quantile};

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} outside (0, 1)")))
    }
}

/// Mixes an H value with an independent uniform η in normal space:
/// Φ((Φ⁻¹(h) + σΦ⁻¹(η)) / √(1 + σ²)). σ = 0 returns `h`.
pub fn eval_noisy(h: f64, eta: f64, sigma: f64) -> Result<f64> {
    check_unit("h", h)?;
    check_unit("eta", eta)?;
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(h);
    }
    let s = (1.0 + sigma * sigma).sqrt();
    Ok(clamp_open(norm_cdf(
        (norm_quantile(h) + sigma * norm_quantile(eta)) / s,
    )))
}

/// Node-failure composition: with probability α the tie follows H, otherwise
/// it is driven by an independent uniform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureSpec {
    pub alpha: f64,
    pub base: HFunction,
}

impl FailureSpec {
    pub fn new(alpha: f64, base: HFunction) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} outside [0, 1]")));
        }
        Ok(FailureSpec { alpha, base })
    }

    /// H(x, y)^α · δ^(1−α), where δ^(1−α) = η/(1−α) for η ≤ 1−α and 1
    /// otherwise.
    pub fn eval(&self, x: f64, y: f64, eta: f64) -> Result<f64> {
        check_unit("eta", eta)?;
        let h = self.base.eval(x, y)?;
        let a = self.alpha;
        if a == 1.0 {
            return Ok(h);
        }
        let d = if eta <= 1.0 - a { eta / (1.0 - a) } else { 1.0 };
        Ok(clamp_open(h.powf(a) * d))
    }
}

/// H_outer(H_inner(x, y), η): a three-argument composition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub outer: HFunction,
    pub inner: HFunction,
}

impl Chain {
    pub fn eval(&self, x: f64, y: f64, eta: f64) -> Result<f64> {
        check_unit("eta", eta)?;
        let inner = self.inner.eval(x, y)?;
        self.outer.eval(inner, eta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hfunc::{catalog, Association};
    use crate::numeric::stats::ks_statistic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniforms(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| loop {
                let u: f64 = rng.random();
                if u > 0.0 {
                    break u;
                }
            })
            .collect()
    }

    #[test]
    fn noisy_is_identity_without_noise() {
        assert_eq!(eval_noisy(0.3, 0.9, 0.0).unwrap(), 0.3);
        // large noise pushes toward eta
        let v = eval_noisy(0.3, 0.9, 1e6).unwrap();
        assert!((v - 0.9).abs() < 1e-5);
        assert!(eval_noisy(0.3, 0.9, -1.0).is_err());
        assert!(eval_noisy(1.0, 0.9, 1.0).is_err());
    }

    #[test]
    fn failure_reference_values() {
        let base = HFunction::projection(1, Association::Positive).unwrap();
        let f = FailureSpec::new(0.95, base.clone()).unwrap();
        // η above 1 − α: δ = 1
        let v = f.eval(0.81, 0.5, 0.2).unwrap();
        assert!((v - 0.81f64.powf(0.95)).abs() < 1e-15);
        // independent value: python 0.81 ** 0.95
        assert!((v - 0.818579318474666).abs() < 1e-12);
        // η below 1 − α scales by η/(1 − α)
        let v = f.eval(0.81, 0.5, 0.025).unwrap();
        assert!((v - 0.81f64.powf(0.95) * 0.5).abs() < 1e-12);

        let one = FailureSpec::new(1.0, base.clone()).unwrap();
        assert_eq!(one.eval(0.42, 0.5, 0.01).unwrap(), 0.42);
        let zero = FailureSpec::new(0.0, base.clone()).unwrap();
        assert!((zero.eval(0.42, 0.5, 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert!(FailureSpec::new(1.5, base).is_err());
    }

    #[test]
    fn compositions_stay_uniform() {
        let n = 20_000;
        let (x, y, e) = (uniforms(n, 1), uniforms(n, 2), uniforms(n, 3));
        let h = HFunction::normal_rho(0.7, Association::SimpsonY).unwrap();
        let fail = FailureSpec::new(0.6, h.clone()).unwrap();
        let chain = Chain {
            outer: HFunction::normal_rho(2.0, Association::Negative).unwrap(),
            inner: h.clone(),
        };
        let u = |v: f64| v.clamp(0.0, 1.0);
        let noisy: Vec<f64> = (0..n)
            .map(|i| eval_noisy(h.eval(x[i], y[i]).unwrap(), e[i], 0.8).unwrap())
            .collect();
        let failed: Vec<f64> = (0..n).map(|i| fail.eval(x[i], y[i], e[i]).unwrap()).collect();
        let chained: Vec<f64> = (0..n).map(|i| chain.eval(x[i], y[i], e[i]).unwrap()).collect();
        // 1% critical value for n = 20000 is about 0.0115
        for s in [&noisy, &failed, &chained] {
            assert!(ks_statistic(s, u) < 0.0115);
        }
    }

    #[test]
    fn catalog_members_are_uniform() {
        let n = 20_000;
        let (x, y) = (uniforms(n, 7), uniforms(n, 8));
        for h in catalog() {
            let v: Vec<f64> = (0..n).map(|i| h.eval(x[i], y[i]).unwrap()).collect();
            let d = ks_statistic(&v, |t| t.clamp(0.0, 1.0));
            assert!(d < 0.0115, "{} D = {d}", h.label());
        }
    }
}
