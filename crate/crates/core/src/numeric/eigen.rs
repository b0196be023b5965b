//! Eigen decomposition of general real matrices, keeping the real parts of
//! the eigenvectors.

use std::cmp::Ordering;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

type C64 = Complex<f64>;

#[derive(Clone, Debug)]
pub struct EigenReal {
    /// Eigenvalues sorted by |Re| descending, then Im descending.
    pub values: Vec<C64>,
    /// Column `k` holds the real part of the unit eigenvector for
    /// `values[k]`, phased so its largest component is real and positive.
    pub vectors: DMatrix<f64>,
}

fn order(a: &C64, b: &C64) -> Ordering {
    b.re.abs()
        .total_cmp(&a.re.abs())
        .then_with(|| b.im.total_cmp(&a.im))
}

/// Eigenvalues of `m` in the canonical order, without vectors.
pub fn eigenvalues_sorted(m: &DMatrix<f64>) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{}x{} is not square", m.nrows(), m.ncols())));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let mut vals: Vec<C64> = m.clone().complex_eigenvalues().iter().copied().collect();
    vals.sort_by(order);
    Ok(vals)
}

/// All eigenpairs of `m`.
pub fn eigen_real_parts(m: &DMatrix<f64>) -> Result<EigenReal> {
    eigen_real_parts_top(m, m.nrows())
}

/// The first `k` eigenpairs of `m` in the canonical order. All eigenvalues
/// are returned; vectors only for the first `k`.
pub fn eigen_real_parts_top(m: &DMatrix<f64>, k: usize) -> Result<EigenReal> {
    let values = eigenvalues_sorted(m)?;
    let n = m.nrows();
    let k = k.min(n);
    let mc: DMatrix<C64> = m.map(|x| C64::new(x, 0.0));
    let scale = m.amax().max(1.0);
    let mut found: Vec<(C64, DVector<C64>)> = Vec::with_capacity(k);
    let mut vectors = DMatrix::zeros(n, k);
    for (col, &lambda) in values.iter().take(k).enumerate() {
        // vectors already found for (numerically) the same eigenvalue
        let cluster: Vec<&DVector<C64>> = found
            .iter()
            .filter(|(l, _)| (l - lambda).norm() <= 1e-8 * scale)
            .map(|(_, v)| v)
            .collect();
        let v = inverse_iteration(&mc, lambda, scale, &cluster, col);
        vectors.set_column(col, &v.map(|z| z.re));
        found.push((lambda, v));
    }
    Ok(EigenReal { values, vectors })
}

fn project_out(v: &mut DVector<C64>, basis: &[&DVector<C64>]) {
    for b in basis {
        let c = b.dotc(v);
        *v -= *b * c;
    }
}

fn inverse_iteration(
    m: &DMatrix<C64>,
    lambda: C64,
    scale: f64,
    cluster: &[&DVector<C64>],
    seed: usize,
) -> DVector<C64> {
    let n = m.nrows();
    let shift = lambda + C64::new(scale * 1e-10, 0.0);
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] -= shift;
    }
    let lu = a.lu();
    // deterministic, generic start vector
    let mut v = DVector::from_fn(n, |i, _| {
        C64::new(1.0 + ((i * 7 + seed * 13) % 17) as f64 / 17.0, 0.0)
    });
    project_out(&mut v, cluster);
    v /= C64::new(v.norm().max(f64::MIN_POSITIVE), 0.0);
    for _ in 0..4 {
        let Some(mut w) = lu.solve(&v) else {
            break;
        };
        project_out(&mut w, cluster);
        let norm = w.norm();
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        v = w / C64::new(norm, 0.0);
    }
    // phase: largest-magnitude component real and positive
    let imax = (0..n)
        .max_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm()).then(j.cmp(&i)))
        .unwrap_or(0);
    let p = v[imax];
    if p.norm() > 0.0 {
        let phase = p.conj() / C64::new(p.norm(), 0.0);
        v *= phase;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let e = eigen_real_parts(&DMatrix::identity(3, 3)).unwrap();
        for v in &e.values {
            assert!((v.re - 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
        // the three vectors span the space
        assert!(e.vectors.determinant().abs() > 0.5);
    }

    #[test]
    fn diagonal_order() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0, -2.0]));
        let e = eigen_real_parts(&m).unwrap();
        let re: Vec<f64> = e.values.iter().map(|v| v.re).collect();
        assert!((re[0] - 3.0).abs() < 1e-12);
        assert!((re[1] + 2.0).abs() < 1e-12);
        assert!((re[2] - 1.0).abs() < 1e-12);
        assert!((e.vectors[(1, 0)] - 1.0).abs() < 1e-9);
        assert!((e.vectors[(2, 1)] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rotation() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let e = eigen_real_parts(&m).unwrap();
        assert!(e.values[0].re.abs() < 1e-12 && (e.values[0].im - 1.0).abs() < 1e-12);
        assert!((e.values[1].im + 1.0).abs() < 1e-12);
    }

    #[test]
    fn vectors_satisfy_the_eigen_equation() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.5, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let e = eigen_real_parts(&m).unwrap();
        for k in 0..3 {
            // all eigenvalues are real here, so the real part is the vector
            let v = e.vectors.column(k);
            let r = &m * v - v * e.values[k].re;
            assert!(r.norm() < 1e-8, "k={k}");
            assert!((v.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn non_square_is_an_error() {
        assert!(matches!(
            eigen_real_parts(&DMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
    }
}
