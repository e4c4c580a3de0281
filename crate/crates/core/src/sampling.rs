//! Weighted discrete sampling over matrix rows.
//!
//! The distribution is a cumulative table of squared row norms. A draw maps
//! a uniform variate `u` in `[0, total)` to the first index whose cumulative
//! weight reaches `u`; a draw landing exactly on a cut point selects the
//! lower of the two adjacent indices, and zero-weight rows are never
//! selected because their cumulative interval is empty.

use crate::error::{Error, Result};
use crate::linalg::{dot_slices, DenseMatrix};
use crate::rng::RngState;

/// Candidate sampling mode. `With` draws i.i.d. from the row distribution;
/// `Without` removes each drawn row before the next draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Replacement {
    With,
    Without,
}

/// Cumulative weight table over row indices.
#[derive(Debug, Clone)]
pub struct RowDistribution {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
    positive: usize,
}

impl RowDistribution {
    /// Builds a distribution from nonnegative weights. All-zero weights are
    /// rejected: there is nothing to sample.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter(
                "weight vector must not be empty".into(),
            ));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite(format!("weight {i} is {w}")));
            }
            if w < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "weight {i} is negative ({w})"
                )));
            }
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        let mut positive = 0;
        for &w in &weights {
            acc += w;
            cumulative.push(acc);
            if w > 0.0 {
                positive += 1;
            }
        }
        if acc <= 0.0 {
            return Err(Error::DegenerateMatrix(
                "every sampling weight is zero".into(),
            ));
        }
        Ok(RowDistribution {
            weights,
            cumulative,
            total: acc,
            positive,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Number of rows with positive weight.
    pub fn positive_count(&self) -> usize {
        self.positive
    }

    /// Probability of drawing row `i`.
    pub fn probability(&self, i: usize) -> f64 {
        self.weights[i] / self.total
    }

    /// Index selected by a point `u` in `[0, total]`. Exposed so the cut
    /// point tie rule is directly testable.
    pub fn index_for_point(&self, u: f64) -> usize {
        debug_assert!((0.0..=self.total).contains(&u));
        let mut i = self.cumulative.partition_point(|&c| c < u);
        if i == self.cumulative.len() {
            i -= 1;
        }
        // Only u == 0 under a zero-weight prefix lands here; walk to the
        // first positive weight.
        while self.weights[i] == 0.0 {
            i += 1;
        }
        i
    }

    pub fn sample(&self, rng: &mut RngState) -> usize {
        self.index_for_point(rng.uniform() * self.total)
    }
}

/// Distribution proportional to squared row norms.
pub fn build_row_distribution(a: &DenseMatrix) -> Result<RowDistribution> {
    let weights = (0..a.rows())
        .map(|i| {
            let r = a.row(i);
            dot_slices(r, r)
        })
        .collect();
    RowDistribution::from_weights(weights).map_err(|e| match e {
        Error::DegenerateMatrix(_) => {
            Error::DegenerateMatrix("every row of the matrix is zero".into())
        }
        other => other,
    })
}

/// One draw from the row distribution.
pub fn sample_row(dist: &RowDistribution, rng: &mut RngState) -> usize {
    dist.sample(rng)
}

/// Draws `count` candidate rows in order.
///
/// With replacement the draws are independent; without replacement each
/// drawn row's weight is removed before the next draw (for equal weights
/// this yields uniform subsets), which requires `count` to be at most the
/// number of positive-weight rows.
pub fn sample_candidates(
    dist: &RowDistribution,
    rng: &mut RngState,
    count: usize,
    replacement: Replacement,
) -> Result<Vec<usize>> {
    if count == 0 {
        return Err(Error::InvalidParameter(
            "candidate count must be at least 1".into(),
        ));
    }
    match replacement {
        Replacement::With => Ok((0..count).map(|_| dist.sample(rng)).collect()),
        Replacement::Without => {
            if count > dist.positive_count() {
                return Err(Error::InvalidParameter(format!(
                    "cannot draw {count} distinct rows from {} with positive weight",
                    dist.positive_count()
                )));
            }
            let mut remaining: Vec<f64> = (0..dist.len()).map(|i| dist.weight(i)).collect();
            let mut picks = Vec::with_capacity(count);
            for _ in 0..count {
                let total: f64 = remaining.iter().sum();
                let target = rng.uniform() * total;
                let mut acc = 0.0;
                let mut chosen = None;
                for (i, &w) in remaining.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    acc += w;
                    if acc >= target {
                        chosen = Some(i);
                        break;
                    }
                }
                // Float shortfall in the running sum can leave target above
                // acc; fall back to the last positive-weight row.
                let i = match chosen {
                    Some(i) => i,
                    None => remaining
                        .iter()
                        .rposition(|&w| w > 0.0)
                        .expect("positive weight remains"),
                };
                picks.push(i);
                remaining[i] = 0.0;
            }
            Ok(picks)
        }
    }
}
