//! A dense overdetermined linear system bundled with the per-row data the
//! solvers need: row norms and the norm-weighted sampling distribution.

use crate::error::{Error, Result};
use crate::linalg::{dot_slices, DenseMatrix, RealVector};
use crate::sampling::{build_row_distribution, RowDistribution};

/// `A x = b` with cached row norms and the squared-norm row distribution.
///
/// Construction validates shapes and rejects all-zero matrices; individual
/// zero rows are allowed (they simply carry zero sampling weight).
#[derive(Debug, Clone)]
pub struct LinearSystem {
    a: DenseMatrix,
    b: RealVector,
    row_norms: Vec<f64>,
    row_norms_sq: Vec<f64>,
    distribution: RowDistribution,
}

impl LinearSystem {
    pub fn new(a: DenseMatrix, b: RealVector) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "matrix has {} rows but right-hand side has {} entries",
                a.rows(),
                b.len()
            )));
        }
        let distribution = build_row_distribution(&a)?;
        let row_norms_sq: Vec<f64> = (0..a.rows()).map(|i| distribution.weight(i)).collect();
        let row_norms = row_norms_sq.iter().map(|&w| w.sqrt()).collect();
        Ok(LinearSystem {
            a,
            b,
            row_norms,
            row_norms_sq,
            distribution,
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &RealVector {
        &self.b
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.row_norms[i]
    }

    pub fn row_norm_sq(&self, i: usize) -> f64 {
        self.row_norms_sq[i]
    }

    pub fn distribution(&self) -> &RowDistribution {
        &self.distribution
    }

    /// Largest absolute row residual `|b_i - <a_i, x>|`.
    pub fn residual_inf(&self, x: &RealVector) -> Result<f64> {
        if x.len() != self.cols() {
            return Err(Error::DimensionMismatch(format!(
                "iterate has {} entries but the system has {} columns",
                x.len(),
                self.cols()
            )));
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows() {
            let r = (self.b[i] - dot_slices(self.a.row(i), x.as_slice())).abs();
            if r > worst {
                worst = r;
            }
        }
        Ok(worst)
    }
}
