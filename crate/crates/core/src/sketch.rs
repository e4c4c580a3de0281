//! Gaussian random sketching.
//!
//! A sketch is a `d x n` matrix with i.i.d. `N(0, 1/d)` entries. Applied to
//! vectors in `R^n` it approximately preserves pairwise squared distances
//! for any fixed finite point set: with target dimension
//! `d = ceil(c * ln(set_size) / delta^2)` each squared norm lands within a
//! `(1 +/- delta)` factor with high probability.

use crate::error::{Error, Result};
use crate::linalg::{dot_slices, DenseMatrix, RealVector};
use crate::rng::{gaussian_vector, RngState};
use crate::system::LinearSystem;

/// Dimension constant used when nothing more specific is known about the
/// point set. Conservative enough for Gaussian sketches at the failure
/// probabilities this library targets.
pub const JL_DEFAULT_C: f64 = 8.0;

/// Target dimension `ceil(c * ln(set_size) / delta^2)` that preserves the
/// pairwise geometry of `set_size` points to within distortion `delta`.
pub fn jl_dimension(delta: f64, set_size: usize, c: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "distortion must lie in (0, 1), got {delta}"
        )));
    }
    if set_size < 2 {
        return Err(Error::InvalidParameter(
            "a point set needs at least 2 elements".into(),
        ));
    }
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "dimension constant must be positive and finite, got {c}"
        )));
    }
    let raw = (c * (set_size as f64).ln() / (delta * delta)).ceil();
    if raw.is_nan() || raw < 1.0 || raw > usize::MAX as f64 {
        return Err(Error::InvalidParameter(format!(
            "target dimension {raw} is out of range"
        )));
    }
    Ok(raw as usize)
}

/// Default sketch dimension for an `n`-column system: enough for the
/// roughly `10 n^2` vectors a solve compares, but never more than `n`
/// (sketching above the source dimension buys nothing).
pub fn default_sketch_dim(n: usize, delta: f64) -> Result<usize> {
    let set_size = 10usize.saturating_mul(n).saturating_mul(n).max(2);
    Ok(jl_dimension(delta, set_size, JL_DEFAULT_C)?.min(n))
}

/// A `d x n` Gaussian sketch with entries `N(0, 1/d)`.
#[derive(Debug, Clone)]
pub struct GaussianSketch {
    matrix: DenseMatrix,
}

impl GaussianSketch {
    pub fn target_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// The identity embedding (`d == n`). Useful as a control: sketched
    /// quantities become exact.
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "identity sketch needs a positive dimension".into(),
            ));
        }
        Ok(GaussianSketch {
            matrix: DenseMatrix::identity(n),
        })
    }
}

/// Draws a fresh `d x n` sketch from the given stream.
pub fn build_sketch(rng: &mut RngState, n: usize, d: usize) -> Result<GaussianSketch> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "sketch dimensions must be positive, got {d} x {n}"
        )));
    }
    let stddev = 1.0 / (d as f64).sqrt();
    let entries = gaussian_vector(rng, d * n, stddev)?;
    Ok(GaussianSketch {
        matrix: DenseMatrix::new(d, n, entries.into_vec())?,
    })
}

/// `Phi x` for a vector `x` in the source space.
pub fn apply_sketch(sketch: &GaussianSketch, x: &RealVector) -> Result<RealVector> {
    sketch.matrix.matvec(x)
}

/// A linear system together with a sketch and the sketched rows
/// `alpha_i = Phi a_i`, precomputed once so each solver iteration scores
/// candidates in the target dimension.
#[derive(Debug, Clone)]
pub struct SketchedSystem {
    base: LinearSystem,
    sketch: GaussianSketch,
    sketched_rows: DenseMatrix,
    sketched_row_norms: Vec<f64>,
}

impl SketchedSystem {
    pub fn new(base: LinearSystem, sketch: GaussianSketch) -> Result<Self> {
        if sketch.source_dim() != base.cols() {
            return Err(Error::DimensionMismatch(format!(
                "sketch maps from {} dimensions but the system has {} columns",
                sketch.source_dim(),
                base.cols()
            )));
        }
        let (sketched_rows, sketched_row_norms) = precompute_rows(base.matrix(), &sketch)?;
        Ok(SketchedSystem {
            base,
            sketch,
            sketched_rows,
            sketched_row_norms,
        })
    }

    pub fn base(&self) -> &LinearSystem {
        &self.base
    }

    pub fn sketch(&self) -> &GaussianSketch {
        &self.sketch
    }

    pub fn sketched_row(&self, i: usize) -> &[f64] {
        self.sketched_rows.row(i)
    }

    pub fn sketched_row_norm(&self, i: usize) -> f64 {
        self.sketched_row_norms[i]
    }

    pub fn target_dim(&self) -> usize {
        self.sketch.target_dim()
    }
}

/// Computes every sketched row `alpha_i = Phi a_i` and its norm. Returned
/// as an `m x d` matrix so row slices stay contiguous.
fn precompute_rows(a: &DenseMatrix, sketch: &GaussianSketch) -> Result<(DenseMatrix, Vec<f64>)> {
    let m = a.rows();
    let d = sketch.target_dim();
    let phi = sketch.matrix();
    let mut data = vec![0.0f64; m.checked_mul(d).ok_or_else(|| {
        Error::InvalidParameter(format!("sketched row table {m} x {d} overflows"))
    })?];
    for i in 0..m {
        let row = a.row(i);
        let out = &mut data[i * d..(i + 1) * d];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = dot_slices(phi.row(k), row);
        }
    }
    let norms = (0..m)
        .map(|i| {
            let r = &data[i * d..(i + 1) * d];
            dot_slices(r, r).sqrt()
        })
        .collect();
    Ok((DenseMatrix::from_raw(m, d, data), norms))
}

/// Incremental update of a sketched iterate: returns `state + coeff * row`.
/// Keeping `Phi x` current this way costs `O(d)` per projection instead of
/// a fresh `O(d n)` multiply.
pub fn update_sketched_iterate(
    state: &RealVector,
    sketched_row: &[f64],
    coeff: f64,
) -> Result<RealVector> {
    if state.len() != sketched_row.len() {
        return Err(Error::DimensionMismatch(format!(
            "sketched iterate has {} entries but the row has {}",
            state.len(),
            sketched_row.len()
        )));
    }
    if !coeff.is_finite() {
        return Err(Error::NonFinite(format!("update coefficient is {coeff}")));
    }
    let entries = state
        .iter()
        .zip(sketched_row)
        .map(|(&s, &r)| s + coeff * r)
        .collect();
    RealVector::new(entries)
}

/// How well a sketch preserved the squared norms of a set of vectors.
#[derive(Debug, Clone)]
pub struct DistortionReport {
    /// `| ||Phi v||^2 / ||v||^2 - 1 |` per vector; zero vectors report 0.
    pub errors: Vec<f64>,
    /// Fraction of vectors whose distortion exceeds the threshold.
    pub exceed_fraction: f64,
    /// Threshold the fractions are measured against.
    pub threshold: f64,
}

/// Measures squared-norm distortion of `vectors` under `sketch` against
/// the target `delta`.
pub fn distortion_report(
    sketch: &GaussianSketch,
    vectors: &[RealVector],
    delta: f64,
) -> Result<DistortionReport> {
    if vectors.is_empty() {
        return Err(Error::InvalidParameter(
            "distortion needs at least one vector".into(),
        ));
    }
    if delta <= 0.0 || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "distortion threshold must be positive, got {delta}"
        )));
    }
    let mut errors = Vec::with_capacity(vectors.len());
    let mut exceeded = 0usize;
    for v in vectors {
        let original = dot_slices(v.as_slice(), v.as_slice());
        let err = if original == 0.0 {
            0.0
        } else {
            let mapped = apply_sketch(sketch, v)?;
            let image = dot_slices(mapped.as_slice(), mapped.as_slice());
            (image / original - 1.0).abs()
        };
        if err > delta {
            exceeded += 1;
        }
        errors.push(err);
    }
    let exceed_fraction = exceeded as f64 / vectors.len() as f64;
    Ok(DistortionReport {
        errors,
        exceed_fraction,
        threshold: delta,
    })
}
