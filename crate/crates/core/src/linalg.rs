//! Dense vectors and row-major matrices.
//!
//! Construction validates finiteness once; the arithmetic kernels assume
//! finite inputs and use fixed left-to-right summation so that results are
//! reproducible bit-for-bit for identical inputs.

use crate::error::{Error, Result};

/// Finite-entry vector over f64.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVector {
    entries: Vec<f64>,
}

impl RealVector {
    /// Validating constructor; rejects NaN and infinity.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(i) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!(
                "vector entry {i} is {}",
                entries[i]
            )));
        }
        Ok(RealVector { entries })
    }

    pub fn zeros(len: usize) -> Self {
        RealVector {
            entries: vec![0.0; len],
        }
    }

    /// Internal constructor for values produced by our own kernels.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        debug_assert!(entries.iter().all(|x| x.is_finite()));
        RealVector { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }
}

impl std::ops::Index<usize> for RealVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

/// Row-major dense matrix with at least one row and one column.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Validating constructor: checks shape, length, and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::InvalidParameter("matrix dimensions overflow".into()))?;
        if data.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "expected {expected} entries for a {rows}x{cols} matrix, got {}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!(
                "matrix entry at flat index {i} is {}",
                data[i]
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        debug_assert!(data.iter().all(|x| x.is_finite()));
        DenseMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    /// Matrix-vector product `A x`.
    pub fn matvec(&self, x: &RealVector) -> Result<RealVector> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "matvec: matrix has {} columns, vector has {} entries",
                self.cols,
                x.len()
            )));
        }
        let out = (0..self.rows)
            .map(|i| dot_slices(self.row(i), x.as_slice()))
            .collect();
        Ok(RealVector::from_raw(out))
    }

    /// Gram matrix `A^T A` (symmetric, cols x cols).
    pub fn gram(&self) -> DenseMatrix {
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ri = row[i];
                for j in i..n {
                    g[i * n + j] += ri * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g[i * n + j] = g[j * n + i];
            }
        }
        DenseMatrix::from_raw(n, n, g)
    }
}

pub(crate) fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

pub(crate) fn norm2_slice(a: &[f64]) -> f64 {
    dot_slices(a, a).sqrt()
}

/// Inner product of two equal-length vectors.
pub fn dot(u: &RealVector, v: &RealVector) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "dot: lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(dot_slices(u.as_slice(), v.as_slice()))
}

/// Euclidean norm.
pub fn norm2(u: &RealVector) -> f64 {
    norm2_slice(u.as_slice())
}

/// Euclidean distance between two equal-length vectors.
pub fn distance(u: &RealVector, v: &RealVector) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    distance_sq(u, v).sqrt()
}

/// Squared Euclidean distance.
pub fn distance_sq(u: &RealVector, v: &RealVector) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let mut acc = 0.0;
    for i in 0..u.len() {
        let d = u[i] - v[i];
        acc += d * d;
    }
    acc
}

/// Squared Frobenius norm, the total squared row mass used as the sampling
/// budget. An all-zero matrix has no usable rows and is rejected.
pub fn frobenius_sq(a: &DenseMatrix) -> Result<f64> {
    let mut acc = 0.0;
    for x in a.data() {
        acc += x * x;
    }
    if acc == 0.0 {
        return Err(Error::DegenerateMatrix(
            "all matrix entries are zero".into(),
        ));
    }
    Ok(acc)
}
