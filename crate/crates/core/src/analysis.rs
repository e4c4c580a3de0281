//! Closed-form convergence analysis.
//!
//! The central quantity is the scaled condition number
//! `R = ||A||_F^2 / sigma_min(A)^2`: norm-weighted random projection
//! contracts the expected squared error by `(1 - 1/R)` per step. On top of
//! that sit a noisy-system variant (decay toward a noise floor instead of
//! zero) and a one-step bound for greedy selection from a random candidate
//! subset, driven by the probability distribution of the best rank inside
//! a uniform subset.

use crate::eigen::sigma_min;
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, norm2_slice, DenseMatrix, RealVector};

/// Conditioning summary of a system matrix.
#[derive(Debug, Clone, Copy)]
pub struct ConditioningReport {
    pub frobenius_sq: f64,
    pub sigma_min: f64,
    /// `||A||_F^2 / sigma_min^2`; at least the column count, and the
    /// per-step contraction is `1 - 1/this`.
    pub scaled_condition: f64,
}

/// Computes `R = ||A||_F^2 / sigma_min(A)^2`.
pub fn scaled_condition(a: &DenseMatrix) -> Result<ConditioningReport> {
    let frobenius = frobenius_sq(a)?;
    let sigma = sigma_min(a)?;
    Ok(ConditioningReport {
        frobenius_sq: frobenius,
        sigma_min: sigma,
        scaled_condition: frobenius / (sigma * sigma),
    })
}

fn validate_condition(r: f64) -> Result<()> {
    if !r.is_finite() || r < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "scaled condition number must be finite and at least 1, got {r}"
        )));
    }
    Ok(())
}

/// Expected squared-error curve of norm-weighted random projection on a
/// consistent system: `e_k = (1 - 1/R)^k * e_0` for `k = 0..=k_max`.
pub fn rk_error_bound_curve(
    scaled_condition: f64,
    initial_error_sq: f64,
    k_max: usize,
) -> Result<Vec<(usize, f64)>> {
    validate_condition(scaled_condition)?;
    if !initial_error_sq.is_finite() || initial_error_sq < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "initial squared error must be finite and nonnegative, got {initial_error_sq}"
        )));
    }
    let factor = 1.0 - 1.0 / scaled_condition;
    Ok((0..=k_max)
        .map(|k| (k, initial_error_sq * factor.powi(k as i32)))
        .collect())
}

/// Expected error bound after `k` steps on an inconsistent system whose
/// per-row noise never exceeds `gamma` times the row norm: the usual decay
/// of the start distance plus a stationary floor of `sqrt(R) * gamma`.
pub fn noisy_rk_bound(
    scaled_condition: f64,
    initial_error: f64,
    k: usize,
    gamma: f64,
) -> Result<f64> {
    validate_condition(scaled_condition)?;
    if !initial_error.is_finite() || initial_error < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "initial error must be finite and nonnegative, got {initial_error}"
        )));
    }
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "noise level must be finite and nonnegative, got {gamma}"
        )));
    }
    let per_step = (1.0 - 1.0 / scaled_condition).sqrt();
    Ok(per_step.powi(k as i32) * initial_error + scaled_condition.sqrt() * gamma)
}

/// Largest row-normalized noise magnitude `max_i |w_i| / ||a_i||`. A zero
/// row with nonzero noise makes the quantity undefined; zero rows with
/// zero noise are ignored.
pub fn gamma_of_noise(a: &DenseMatrix, noise: &RealVector) -> Result<f64> {
    if noise.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows but the noise vector has {} entries",
            a.rows(),
            noise.len()
        )));
    }
    let mut worst = 0.0f64;
    for i in 0..a.rows() {
        let w = noise[i].abs();
        let norm = norm2_slice(a.row(i));
        if norm == 0.0 {
            if w != 0.0 {
                return Err(Error::UndefinedGamma(i));
            }
            continue;
        }
        let ratio = w / norm;
        if ratio > worst {
            worst = ratio;
        }
    }
    Ok(worst)
}

/// Distribution of the best overall rank appearing in a uniform random
/// subset: drawing `subset_size` of `rows` items without replacement,
/// entry `j` (0-based) is the probability that the best item in the subset
/// is the overall `(j + 1)`-th best.
#[derive(Debug, Clone)]
pub struct RankProbabilities {
    probs: Vec<f64>,
    rows: usize,
    subset_size: usize,
}

impl RankProbabilities {
    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn subset_size(&self) -> usize {
        self.subset_size
    }
}

/// Computes the best-rank distribution via the ratio recurrence
/// `p_1 = s/m`, `p_{r+1} = p_r * (m - r - s + 1) / (m - r)`; ranks past
/// `m - s + 1` cannot be the best of a subset of size `s` and get
/// probability zero.
pub fn best_rank_probabilities(rows: usize, subset_size: usize) -> Result<RankProbabilities> {
    if subset_size == 0 || subset_size > rows {
        return Err(Error::InvalidParameter(format!(
            "subset size must lie in 1..={rows}, got {subset_size}"
        )));
    }
    let m = rows as f64;
    let s = subset_size as f64;
    let mut probs = vec![0.0; rows];
    probs[0] = s / m;
    for idx in 1..rows {
        if idx + 1 > rows - subset_size + 1 {
            break;
        }
        // probs[idx - 1] holds rank idx (1-based); step the ratio once.
        let prev_rank = idx as f64;
        probs[idx] = probs[idx - 1] * (m - prev_rank - s + 1.0) / (m - prev_rank);
    }
    Ok(RankProbabilities {
        probs,
        rows,
        subset_size,
    })
}

fn validate_sorted_gains(gains_desc: &[f64]) -> Result<()> {
    for (i, w) in gains_desc.windows(2).enumerate() {
        if !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::NonFinite(format!(
                "gain near position {i} is not finite"
            )));
        }
        if w[1] > w[0] {
            return Err(Error::UnsortedInput(i + 1));
        }
    }
    if let Some(&g) = gains_desc.first() {
        if !g.is_finite() {
            return Err(Error::NonFinite("gain 0 is not finite".into()));
        }
    }
    Ok(())
}

/// Expected one-step advantage of picking the best row of a uniform
/// random subset over picking one row uniformly: `sum_j (p_j - 1/m) g_j`
/// for gains sorted in nonincreasing order. Nonnegative by construction;
/// rounding that would push an exact zero slightly negative is clamped.
pub fn selection_advantage(gains_desc: &[f64], ranks: &RankProbabilities) -> Result<f64> {
    if gains_desc.len() != ranks.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} gains against a distribution over {} rows",
            gains_desc.len(),
            ranks.rows()
        )));
    }
    validate_sorted_gains(gains_desc)?;
    let uniform = 1.0 / ranks.rows() as f64;
    let beta: f64 = gains_desc
        .iter()
        .zip(ranks.as_slice())
        .map(|(&g, &p)| (p - uniform) * g)
        .sum();
    Ok(beta.max(0.0))
}

/// One-step expected squared-error bound for greedy subset selection:
/// the plain random-selection baseline minus the selection advantage,
/// padded by twice the scoring distortion, and never worse than the
/// baseline itself.
pub fn greedy_error_bound(
    gains_desc: &[f64],
    ranks: &RankProbabilities,
    score_distortion: f64,
    baseline_error_sq: f64,
) -> Result<f64> {
    if !score_distortion.is_finite() || score_distortion < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "score distortion must be finite and nonnegative, got {score_distortion}"
        )));
    }
    if !baseline_error_sq.is_finite() {
        return Err(Error::NonFinite(format!(
            "baseline error is {baseline_error_sq}"
        )));
    }
    let beta = selection_advantage(gains_desc, ranks)?;
    Ok((baseline_error_sq - beta + 2.0 * score_distortion).min(baseline_error_sq))
}
