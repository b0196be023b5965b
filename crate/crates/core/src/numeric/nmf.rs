//! Rank-one nonnegative matrix factorization.
//!
//! For a strictly positive matrix the leading singular vectors can be taken
//! componentwise positive, so the unconstrained best rank-one approximation
//! is already the nonnegative one. Dense input uses power iteration on M'M;
//! masked input uses alternating least squares over the observed entries.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 10_000;
const ALS_TOL: f64 = 1e-10;
const ALS_MAX_SWEEPS: usize = 1000;

#[derive(Clone, Debug)]
pub struct RankOne {
    /// Row factor, scaled so that the mean of `ln a` is zero.
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    /// Frobenius norm of `M - a b'` over the observed entries.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl RankOne {
    pub fn outer(&self) -> DMatrix<f64> {
        &self.a * self.b.transpose()
    }
}

fn check_entries(m: &DMatrix<f64>, mask: Option<&DMatrix<bool>>) -> Result<()> {
    if let Some(mask) = mask {
        if mask.shape() != m.shape() {
            return Err(Error::Dimension(format!(
                "mask {:?} vs matrix {:?}",
                mask.shape(),
                m.shape()
            )));
        }
    }
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if mask.is_some_and(|k| k[(r, c)]) {
                continue;
            }
            let v = m[(r, c)];
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!(
                    "entry ({r}, {c}) = {v} is not strictly positive"
                )));
            }
        }
    }
    Ok(())
}

fn normalize(mut a: DVector<f64>, mut b: DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    if a.iter().chain(b.iter()).any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain("factor has a non-positive component".into()));
    }
    let shift = a.iter().map(|x| x.ln()).sum::<f64>() / a.len() as f64;
    let c = shift.exp();
    a /= c;
    b *= c;
    Ok((a, b))
}

fn residual(m: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>, mask: Option<&DMatrix<bool>>) -> f64 {
    let mut s = 0.0;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if mask.is_some_and(|k| k[(r, c)]) {
                continue;
            }
            s += (m[(r, c)] - a[r] * b[c]).powi(2);
        }
    }
    s.sqrt()
}

/// Factorizes `m ≈ a b'` with positive vectors. Entries where `mask` is true
/// are ignored.
pub fn rank_one_factorize(m: &DMatrix<f64>, mask: Option<&DMatrix<bool>>) -> Result<RankOne> {
    if m.is_empty() {
        return Err(Error::Empty("rank_one_factorize needs a non-empty matrix"));
    }
    check_entries(m, mask)?;
    let mask = mask.filter(|k| k.iter().any(|&x| x));
    match mask {
        None => power_iteration(m),
        Some(k) => alternating_least_squares(m, k),
    }
}

fn power_iteration(m: &DMatrix<f64>) -> Result<RankOne> {
    let mtm = m.transpose() * m;
    let n = mtm.nrows();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut rq = f64::NAN;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=POWER_MAX_ITER {
        iterations = it;
        let w = &mtm * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return Err(Error::Domain("matrix is zero".into()));
        }
        let next = w / norm;
        let next_rq = next.dot(&(&mtm * &next));
        let dv = (&next - &v).amax();
        let drq = (next_rq - rq).abs();
        v = next;
        rq = next_rq;
        if drq <= POWER_TOL * rq.abs() && dv <= 1e-10 {
            converged = true;
            break;
        }
    }
    let v = v.map(f64::abs);
    let u = m * &v;
    let (a, b) = normalize(u, v)?;
    let residual = residual(m, &a, &b, None);
    Ok(RankOne {
        a,
        b,
        residual,
        iterations,
        converged,
    })
}

fn alternating_least_squares(m: &DMatrix<f64>, mask: &DMatrix<bool>) -> Result<RankOne> {
    let (nr, nc) = m.shape();
    let observed = |r: usize, c: usize| !mask[(r, c)];
    for r in 0..nr {
        if !(0..nc).any(|c| observed(r, c)) {
            return Err(Error::Domain(format!("row {r} has no observed entries")));
        }
    }
    for c in 0..nc {
        if !(0..nr).any(|r| observed(r, c)) {
            return Err(Error::Domain(format!("column {c} has no observed entries")));
        }
    }
    let mut a = DVector::from_fn(nr, |r, _| {
        let (s, k) = (0..nc)
            .filter(|&c| observed(r, c))
            .fold((0.0, 0usize), |(s, k), c| (s + m[(r, c)], k + 1));
        s / k as f64
    });
    let mut b = DVector::from_element(nc, 1.0);
    let mut prev = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=ALS_MAX_SWEEPS {
        iterations = it;
        for c in 0..nc {
            let (mut num, mut den) = (0.0, 0.0);
            for r in (0..nr).filter(|&r| observed(r, c)) {
                num += a[r] * m[(r, c)];
                den += a[r] * a[r];
            }
            b[c] = num / den;
        }
        for r in 0..nr {
            let (mut num, mut den) = (0.0, 0.0);
            for c in (0..nc).filter(|&c| observed(r, c)) {
                num += b[c] * m[(r, c)];
                den += b[c] * b[c];
            }
            a[r] = num / den;
        }
        let obj = residual(m, &a, &b, Some(mask)).powi(2);
        if (prev - obj).abs() <= ALS_TOL * obj.max(f64::MIN_POSITIVE) || obj == 0.0 {
            converged = true;
            break;
        }
        prev = obj;
    }
    let (a, b) = normalize(a, b)?;
    let residual = residual(m, &a, &b, Some(mask));
    Ok(RankOne {
        a,
        b,
        residual,
        iterations,
        converged,
    })
}
