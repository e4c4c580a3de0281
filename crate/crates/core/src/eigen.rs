//! Symmetric eigenvalues via cyclic Jacobi rotations, and the smallest
//! singular value derived from them.
//!
//! `sigma_min(A)` forms the Gram matrix A^T A and returns the square root
//! of its smallest eigenvalue. Going through the Gram matrix squares the
//! condition number, so the smallest eigenvalue carries an absolute error
//! of roughly `tol * lambda_max`; the rank-deficiency gate below is set at
//! the same scale, which makes near-singular inputs an error rather than a
//! garbage value.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Relative off-diagonal tolerance for the Jacobi sweep, and the
/// rank-deficiency gate `lambda_min <= tol * lambda_max`.
pub const SIGMA_REL_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 64;

/// Eigenvalues of a symmetric matrix, ascending. The input is assumed
/// symmetric; only the upper triangle drives the rotations but both halves
/// are carried so the result does not depend on which half the caller
/// filled.
pub fn symmetric_eigenvalues(g: &DenseMatrix, rel_tol: f64) -> Result<Vec<f64>> {
    if g.rows() != g.cols() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            g.rows(),
            g.cols()
        )));
    }
    if !(rel_tol.is_finite() && rel_tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "relative tolerance must be positive and finite, got {rel_tol}"
        )));
    }
    let n = g.rows();
    let mut a = g.data().to_vec();
    if n == 1 {
        return Ok(vec![a[0]]);
    }
    let fro = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if fro == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let idx = |r: usize, c: usize| r * n + c;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                let v = a[idx(p, q)];
                off_sq += v * v;
            }
        }
        if (2.0 * off_sq).sqrt() <= rel_tol * fro {
            converged = true;
            break;
        }
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                // Asymptotic tangent for huge theta keeps theta^2 finite.
                let t = if theta.abs() < 1e150 {
                    let sign = if theta < 0.0 { -1.0 } else { 1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                } else {
                    0.5 / theta
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[idx(k, p)] = new_kp;
                    a[idx(p, k)] = new_kp;
                    a[idx(k, q)] = new_kq;
                    a[idx(q, k)] = new_kq;
                }
                a[idx(p, p)] = app - t * apq;
                a[idx(q, q)] = aqq + t * apq;
                a[idx(p, q)] = 0.0;
                a[idx(q, p)] = 0.0;
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!(
            "Jacobi sweep limit {MAX_SWEEPS} reached for a {n}x{n} matrix"
        )));
    }
    let mut evals: Vec<f64> = (0..n).map(|i| a[idx(i, i)]).collect();
    evals.sort_by(f64::total_cmp);
    Ok(evals)
}

/// Smallest singular value of a tall matrix (rows >= cols).
///
/// Errors with `RankDeficient` when the smallest Gram eigenvalue is at or
/// below `SIGMA_REL_TOL` times the largest, which also covers all-zero
/// input.
pub fn sigma_min(a: &DenseMatrix) -> Result<f64> {
    if a.rows() < a.cols() {
        return Err(Error::InvalidParameter(format!(
            "sigma_min needs rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let evals = symmetric_eigenvalues(&a.gram(), SIGMA_REL_TOL)?;
    let lambda_min = evals[0];
    let lambda_max = *evals.last().expect("at least one eigenvalue");
    if lambda_min <= SIGMA_REL_TOL * lambda_max {
        return Err(Error::RankDeficient(format!(
            "smallest Gram eigenvalue {lambda_min:.3e} is within tolerance of zero \
             (largest {lambda_max:.3e})"
        )));
    }
    Ok(lambda_min.sqrt())
}
