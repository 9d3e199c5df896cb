//! Dense linear algebra: complex LU log-determinant and small real
//! least-squares solves.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{CasimirError, Result};

/// `ln det(A)` from LU with partial pivoting. The real part is `sum ln|U_ii|`;
/// the imaginary part is the phase of the determinant in `(-pi, pi]`.
/// Returns `None` for an exactly singular matrix.
pub fn complex_log_det(a: &DMatrix<Complex64>) -> Option<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    // Row-major copy keeps the elimination loops contiguous.
    let mut m: Vec<Complex64> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            m.push(a[(i, j)]);
        }
    }
    let mut log_abs = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut piv = k;
        let mut best = m[k * n + k].norm();
        for i in k + 1..n {
            let v = m[i * n + k].norm();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return None;
        }
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
            phase = -phase;
        }
        let pivot = m[k * n + k];
        log_abs += best.ln();
        phase *= pivot / best;
        let inv = pivot.inv();
        let (head, tail) = m.split_at_mut((k + 1) * n);
        let row_k = &head[k * n..];
        for row in tail.chunks_exact_mut(n) {
            let factor = row[k] * inv;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k + 1..n {
                row[j] -= factor * row_k[j];
            }
        }
        // Renormalise to keep rounding in the phase from drifting.
        phase /= phase.norm();
    }
    Some(Complex64::new(log_abs, phase.arg()))
}

/// `ln|det A|` and the sign of `det A` by LU with partial pivoting,
/// overwriting `a`. Returns `None` for an exactly singular matrix.
pub fn real_log_det(a: &mut DMatrix<f64>) -> Option<(f64, f64)> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    // Work on the transpose so that each pivot row is a contiguous column.
    a.transpose_mut();
    let data = a.as_mut_slice();
    let mut log_abs = 0.0;
    let mut sign = 1.0;
    for k in 0..n {
        let mut piv = k;
        let mut best = data[k * n + k].abs();
        for i in k + 1..n {
            let v = data[k * n + i].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return None;
        }
        if piv != k {
            for j in 0..n {
                data.swap(j * n + k, j * n + piv);
            }
            sign = -sign;
        }
        let pivot = data[k * n + k];
        log_abs += best.ln();
        if pivot < 0.0 {
            sign = -sign;
        }
        let inv = 1.0 / pivot;
        for i in k + 1..n {
            data[k * n + i] *= inv;
        }
        let (head, tail) = data.split_at_mut((k + 1) * n);
        let col_k = &head[k * n..];
        for col in tail.chunks_exact_mut(n) {
            let f = col[k];
            if f == 0.0 {
                continue;
            }
            for i in k + 1..n {
                col[i] -= f * col_k[i];
            }
        }
    }
    Some((log_abs, sign))
}

/// Least-squares solution of `A c ~ b` through the normal equations with unit
/// column scaling. Returns the coefficients and `(A^T A)^{-1}` in the original
/// (unscaled) parameterisation.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let p = a.ncols();
    if a.nrows() < p {
        return Err(CasimirError::RankDeficient(format!(
            "{} samples for {} parameters",
            a.nrows(),
            p
        )));
    }
    let mut scale = DVector::zeros(p);
    for j in 0..p {
        let n = a.column(j).norm();
        if n == 0.0 || !n.is_finite() {
            return Err(CasimirError::RankDeficient(format!("column {j} is zero")));
        }
        scale[j] = n;
    }
    let mut s = a.clone();
    for j in 0..p {
        let sj = scale[j];
        s.column_mut(j).scale_mut(1.0 / sj);
    }
    let ata = s.transpose() * &s;
    let chol = ata.clone().cholesky().ok_or_else(|| {
        CasimirError::RankDeficient("normal matrix is not positive definite".into())
    })?;
    let inv = chol.inverse();
    let cond_guard = inv.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !cond_guard.is_finite() || cond_guard > 1e12 {
        return Err(CasimirError::RankDeficient(format!(
            "normal matrix is ill-conditioned (inverse entry {cond_guard:e})"
        )));
    }
    let coef_scaled = &inv * (s.transpose() * b);
    let mut coef = coef_scaled.clone();
    let mut cov = inv.clone();
    for i in 0..p {
        coef[i] /= scale[i];
        for j in 0..p {
            cov[(i, j)] /= scale[i] * scale[j];
        }
    }
    Ok((coef, cov))
}
