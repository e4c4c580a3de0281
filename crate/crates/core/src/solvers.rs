//! Kaczmarz-family iteration.
//!
//! Every method shares one primitive: project the iterate onto the
//! hyperplane of a selected row. They differ only in how the row is
//! selected:
//!
//! * `cyclic` walks rows in order;
//! * `rk` samples one row with probability proportional to its squared
//!   norm;
//! * `oracle` samples a candidate set the same way, then picks the row
//!   with the largest normalized residual, scored exactly;
//! * `rkjl` is `oracle` with the scoring moved into a low-dimensional
//!   sketched space, so each candidate costs `O(d)` instead of `O(n)`,
//!   plus an exact double-check of the winner before projecting.
//!
//! `oracle` and `rkjl` share a single selection routine; with an identity
//! sketch they follow identical paths draw for draw, which the test suite
//! pins down.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{distance, dot_slices, RealVector};
use crate::rng::{sphere_uniform, RngState};
use crate::sampling::{sample_candidates, sample_row, Replacement};
use crate::sketch::{apply_sketch, GaussianSketch, SketchedSystem};
use crate::system::LinearSystem;

/// Stream index for drawing the default start point.
pub const INITIAL_ITERATE_STREAM: u64 = 1;
/// Stream index for row selection draws during iteration.
pub const ROW_SAMPLING_STREAM: u64 = 2;
/// Stream index for sketch entries.
pub const SKETCH_STREAM: u64 = 3;

/// Row selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Cyclic,
    Rk,
    Rkjl,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Cyclic, Method::Rk, Method::Rkjl, Method::Oracle];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Cyclic => "cyclic",
            Method::Rk => "rk",
            Method::Rkjl => "rkjl",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cyclic" => Ok(Method::Cyclic),
            "rk" => Ok(Method::Rk),
            "rkjl" => Ok(Method::Rkjl),
            "oracle" => Ok(Method::Oracle),
            other => Err(Error::InvalidParameter(format!(
                "unknown method '{other}' (expected cyclic, rk, rkjl, or oracle)"
            ))),
        }
    }
}

/// Knobs for the greedy candidate-set methods.
#[derive(Debug, Clone, Copy)]
pub struct GreedyOptions {
    /// Rows sampled per iteration.
    pub candidate_count: usize,
    /// Whether one iteration's candidates may repeat.
    pub replacement: Replacement,
    /// Exactly rescore the winner against the first candidate before
    /// projecting, guarding against a sketch-induced bad pick.
    pub test_step: bool,
}

/// Full configuration of a solve run.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub method: Method,
    /// Projection budget; the run stops here if tolerance is never met.
    pub max_iterations: usize,
    /// Stop once the error (with a known solution) or the largest row
    /// residual (without one) falls to this value.
    pub error_tolerance: f64,
    /// Candidate rows per greedy iteration; defaults to the column count.
    pub candidate_set_size: Option<usize>,
    /// Seed from which the start point and row draws derive.
    pub seed: u64,
    pub replacement: Replacement,
    pub test_step_enabled: bool,
    /// Sketched-iterate refresh cadence; defaults to the column count.
    pub refresh_period: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            method: Method::Rk,
            max_iterations: 1000,
            error_tolerance: 0.0,
            candidate_set_size: None,
            seed: 0,
            replacement: Replacement::With,
            test_step_enabled: true,
            refresh_period: None,
        }
    }
}

/// The evolving iterate, with its sketched image when one is maintained.
#[derive(Debug, Clone)]
pub struct IterateState {
    x: RealVector,
    sketched: Option<RealVector>,
    iteration: usize,
}

impl IterateState {
    pub fn new(x: RealVector) -> Self {
        IterateState {
            x,
            sketched: None,
            iteration: 0,
        }
    }

    /// Starts at `x` and caches its sketched image.
    pub fn with_sketch(x: RealVector, sketch: &GaussianSketch) -> Result<Self> {
        let sketched = apply_sketch(sketch, &x)?;
        Ok(IterateState {
            x,
            sketched: Some(sketched),
            iteration: 0,
        })
    }

    pub fn iterate(&self) -> &RealVector {
        &self.x
    }

    pub fn into_iterate(self) -> RealVector {
        self.x
    }

    pub fn sketched_iterate(&self) -> Option<&RealVector> {
        self.sketched.as_ref()
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Recomputes the sketched image from scratch, discarding accumulated
    /// incremental-update rounding.
    pub fn refresh_sketched(&mut self, sketch: &GaussianSketch) -> Result<()> {
        self.sketched = Some(apply_sketch(sketch, &self.x)?);
        Ok(())
    }
}

/// Per-phase wall-clock nanoseconds accumulated over a solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseTimings {
    pub preprocess_ns: u64,
    pub sample_ns: u64,
    pub score_ns: u64,
    pub test_ns: u64,
    pub project_ns: u64,
    pub update_ns: u64,
}

impl PhaseTimings {
    pub fn add(&mut self, other: &PhaseTimings) {
        self.preprocess_ns += other.preprocess_ns;
        self.sample_ns += other.sample_ns;
        self.score_ns += other.score_ns;
        self.test_ns += other.test_ns;
        self.project_ns += other.project_ns;
        self.update_ns += other.update_ns;
    }

    pub fn total_ns(&self) -> u64 {
        self.preprocess_ns
            + self.sample_ns
            + self.score_ns
            + self.test_ns
            + self.project_ns
            + self.update_ns
    }
}

/// What a single step did.
#[derive(Debug, Clone, Copy)]
pub struct StepReport {
    /// Row the step selected.
    pub row: usize,
    /// Absolute residual of that row before projecting.
    pub residual: f64,
    /// True when the step left the iterate unchanged (zero row in the
    /// cyclic order).
    pub skipped: bool,
    pub timings: PhaseTimings,
}

/// One trace entry. Entry 0 describes the start point (its residual is
/// the largest over all rows); later entries describe one projection each
/// (their residual is the selected row's, measured before the move).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub row: Option<usize>,
    /// Distance to the known solution, when one was supplied.
    pub error: Option<f64>,
    pub residual: f64,
    pub elapsed_ns: u64,
    pub skipped: bool,
}

/// Why a solve stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalStatus {
    Converged,
    BudgetExhausted,
}

impl fmt::Display for TerminalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TerminalStatus::Converged => "converged",
            TerminalStatus::BudgetExhausted => "budget-exhausted",
        })
    }
}

/// Complete record of one solve.
#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub method: Method,
    pub records: Vec<TraceRecord>,
    pub status: TerminalStatus,
    pub timings: PhaseTimings,
}

impl SolveTrace {
    /// Number of projection steps taken.
    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }

    pub fn final_error(&self) -> Option<f64> {
        self.records.last().and_then(|r| r.error)
    }

    pub fn final_residual(&self) -> f64 {
        self.records.last().map(|r| r.residual).unwrap_or(0.0)
    }

    /// Error at iteration `k`, holding the last value once the trace ends
    /// (a converged run stays converged).
    pub fn error_at(&self, k: usize) -> Option<f64> {
        let idx = k.min(self.records.len() - 1);
        self.records[idx].error
    }

    /// First iteration whose error reaches `threshold`, if any.
    pub fn iterations_to_error(&self, threshold: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| matches!(r.error, Some(e) if e <= threshold))
            .map(|r| r.iteration)
    }

    /// Exact equality of the iteration paths: same rows, same errors and
    /// residuals bit for bit, same skip pattern. Timing is ignored.
    pub fn path_eq(&self, other: &SolveTrace) -> bool {
        self.method == other.method
            && self.status == other.status
            && self.records.len() == other.records.len()
            && self.records.iter().zip(&other.records).all(|(a, b)| {
                a.iteration == b.iteration
                    && a.row == b.row
                    && a.skipped == b.skipped
                    && a.residual.to_bits() == b.residual.to_bits()
                    && match (a.error, b.error) {
                        (None, None) => true,
                        (Some(x), Some(y)) => x.to_bits() == y.to_bits(),
                        _ => false,
                    }
            })
    }
}

/// The system a solve runs against. The sketched form carries the plain
/// system inside it; methods that do not score in the sketched space
/// simply use that base.
#[derive(Debug, Clone, Copy)]
pub enum SolveInput<'a> {
    Plain(&'a LinearSystem),
    Sketched(&'a SketchedSystem),
}

impl<'a> SolveInput<'a> {
    pub fn base(&self) -> &'a LinearSystem {
        match self {
            SolveInput::Plain(s) => s,
            SolveInput::Sketched(s) => s.base(),
        }
    }
}

pub(crate) fn nanos_since(start: Instant) -> u64 {
    u64::try_from(start.elapsed().as_nanos()).unwrap_or(u64::MAX)
}

/// `y += alpha * x`, in place.
pub(crate) fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Projects `x` onto the hyperplane `<row, x> = rhs` and returns the row's
/// residual before the move. The projection moves along `row` itself, so
/// the displacement is orthogonal to the target hyperplane.
pub fn project_onto_row(
    x: &mut RealVector,
    row: &[f64],
    rhs: f64,
    row_norm_sq: f64,
) -> Result<f64> {
    if x.len() != row.len() {
        return Err(Error::DimensionMismatch(format!(
            "iterate has {} entries but the row has {}",
            x.len(),
            row.len()
        )));
    }
    if row_norm_sq <= 0.0 || !row_norm_sq.is_finite() {
        return Err(Error::ProjectionUndefined);
    }
    let residual = rhs - dot_slices(row, x.as_slice());
    axpy(x.as_mut_slice(), residual / row_norm_sq, row);
    Ok(residual)
}

/// Squared-distance defect of one projection step against the right
/// triangle it should form with the solution: a true orthogonal
/// projection satisfies `|x_old - sol|^2 = |x_new - sol|^2 + |x_new -
/// x_old|^2` exactly, so the returned value is rounding noise.
pub fn pythagorean_defect(
    x_old: &RealVector,
    x_new: &RealVector,
    solution: &RealVector,
) -> Result<f64> {
    if x_old.len() != x_new.len() || x_old.len() != solution.len() {
        return Err(Error::DimensionMismatch(
            "pythagorean check needs equal-length vectors".into(),
        ));
    }
    let before = crate::linalg::distance_sq(x_old, solution);
    let after = crate::linalg::distance_sq(x_new, solution);
    let moved = crate::linalg::distance_sq(x_new, x_old);
    Ok(before - after - moved)
}

fn check_iterate_dims(system: &LinearSystem, state: &IterateState) -> Result<()> {
    if state.x.len() != system.cols() {
        return Err(Error::DimensionMismatch(format!(
            "iterate has {} entries but the system has {} columns",
            state.x.len(),
            system.cols()
        )));
    }
    Ok(())
}

/// One cyclic step: row `k mod m`. A zero row cannot be projected onto and
/// is skipped without advancing the iterate (the position still advances).
pub fn step_cyclic(system: &LinearSystem, state: &mut IterateState) -> Result<StepReport> {
    check_iterate_dims(system, state)?;
    let j = state.iteration % system.rows();
    let start = Instant::now();
    let mut timings = PhaseTimings::default();
    let norm_sq = system.row_norm_sq(j);
    let report = if norm_sq > 0.0 {
        let residual =
            project_onto_row(&mut state.x, system.matrix().row(j), system.rhs()[j], norm_sq)?;
        timings.project_ns = nanos_since(start);
        StepReport {
            row: j,
            residual: residual.abs(),
            skipped: false,
            timings,
        }
    } else {
        let residual = system.rhs()[j].abs();
        timings.project_ns = nanos_since(start);
        StepReport {
            row: j,
            residual,
            skipped: true,
            timings,
        }
    };
    state.iteration += 1;
    Ok(report)
}

/// One norm-weighted random step: a single row drawn with probability
/// proportional to its squared norm, then projected onto.
pub fn step_rk(
    system: &LinearSystem,
    state: &mut IterateState,
    rng: &mut RngState,
) -> Result<StepReport> {
    check_iterate_dims(system, state)?;
    let mut timings = PhaseTimings::default();
    let t = Instant::now();
    let j = sample_row(system.distribution(), rng);
    timings.sample_ns = nanos_since(t);
    let t = Instant::now();
    let residual = project_onto_row(
        &mut state.x,
        system.matrix().row(j),
        system.rhs()[j],
        system.row_norm_sq(j),
    )?;
    timings.project_ns = nanos_since(t);
    state.iteration += 1;
    Ok(StepReport {
        row: j,
        residual: residual.abs(),
        skipped: false,
        timings,
    })
}

/// Where candidate scores come from: the true rows, or their sketched
/// images.
enum ScoreSource<'a> {
    Exact(&'a LinearSystem),
    Sketched(&'a SketchedSystem),
}

impl ScoreSource<'_> {
    fn row(&self, i: usize) -> &[f64] {
        match self {
            ScoreSource::Exact(s) => s.matrix().row(i),
            ScoreSource::Sketched(s) => s.sketched_row(i),
        }
    }

    fn norm(&self, i: usize) -> f64 {
        match self {
            ScoreSource::Exact(s) => s.row_norm(i),
            ScoreSource::Sketched(s) => s.sketched_row_norm(i),
        }
    }
}

/// Index of the largest value; earlier positions win ties.
fn position_of_max(scores: &[f64]) -> usize {
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (pos, &s) in scores.iter().enumerate() {
        if s > best_score {
            best_score = s;
            best = pos;
        }
    }
    best
}

/// Normalized residual of row `i` at the point `z`, using the given row
/// table. Zero-norm rows score zero: they carry no direction to project
/// along.
fn normalized_residual(rhs: f64, row: &[f64], norm: f64, z: &[f64]) -> f64 {
    if norm > 0.0 {
        (rhs - dot_slices(row, z)).abs() / norm
    } else {
        0.0
    }
}

/// Shared greedy step: sample a candidate set, score every candidate,
/// optionally double-check the winner exactly, then project exactly.
///
/// The selection arithmetic depends only on the bytes in the score table,
/// so the exact and identity-sketched variants take identical paths.
fn greedy_step(
    base: &LinearSystem,
    source: &ScoreSource<'_>,
    state: &mut IterateState,
    rng: &mut RngState,
    opts: &GreedyOptions,
) -> Result<StepReport> {
    check_iterate_dims(base, state)?;
    let mut timings = PhaseTimings::default();

    let t = Instant::now();
    let candidates = sample_candidates(
        base.distribution(),
        rng,
        opts.candidate_count,
        opts.replacement,
    )?;
    timings.sample_ns = nanos_since(t);

    let t = Instant::now();
    let z: &[f64] = match source {
        ScoreSource::Exact(_) => state.x.as_slice(),
        ScoreSource::Sketched(_) => state
            .sketched
            .as_ref()
            .ok_or_else(|| {
                Error::InvalidParameter("sketched scoring needs a sketched iterate".into())
            })?
            .as_slice(),
    };
    let scores: Vec<f64> = candidates
        .iter()
        .map(|&i| normalized_residual(base.rhs()[i], source.row(i), source.norm(i), z))
        .collect();
    let mut j = candidates[position_of_max(&scores)];
    timings.score_ns = nanos_since(t);

    if opts.test_step {
        let t = Instant::now();
        let probe = candidates[0];
        let exact_score = |i: usize| {
            normalized_residual(
                base.rhs()[i],
                base.matrix().row(i),
                base.row_norm(i),
                state.x.as_slice(),
            )
        };
        if exact_score(probe) > exact_score(j) {
            j = probe;
        }
        timings.test_ns = nanos_since(t);
    }

    let t = Instant::now();
    let norm_sq = base.row_norm_sq(j);
    let residual = project_onto_row(&mut state.x, base.matrix().row(j), base.rhs()[j], norm_sq)?;
    timings.project_ns = nanos_since(t);

    if let ScoreSource::Sketched(sys) = source {
        let t = Instant::now();
        let sketched = state
            .sketched
            .as_mut()
            .expect("presence checked before scoring");
        axpy(
            sketched.as_mut_slice(),
            residual / norm_sq,
            sys.sketched_row(j),
        );
        timings.update_ns = nanos_since(t);
    }

    state.iteration += 1;
    Ok(StepReport {
        row: j,
        residual: residual.abs(),
        skipped: false,
        timings,
    })
}

/// One greedy step scored with the true rows. Each candidate costs a full
/// `O(n)` inner product; this is the reference the sketched method chases.
pub fn step_oracle(
    system: &LinearSystem,
    state: &mut IterateState,
    rng: &mut RngState,
    opts: &GreedyOptions,
) -> Result<StepReport> {
    greedy_step(system, &ScoreSource::Exact(system), state, rng, opts)
}

/// One greedy step scored with sketched rows at `O(d)` per candidate. The
/// exact projection keeps the iterate correct regardless of sketch
/// quality; the sketch only influences which row is chosen.
pub fn step_rkjl(
    system: &SketchedSystem,
    state: &mut IterateState,
    rng: &mut RngState,
    opts: &GreedyOptions,
) -> Result<StepReport> {
    match &state.sketched {
        Some(s) if s.len() == system.target_dim() => {}
        Some(s) => {
            return Err(Error::DimensionMismatch(format!(
                "sketched iterate has {} entries but the sketch targets {}",
                s.len(),
                system.target_dim()
            )));
        }
        None => {
            return Err(Error::InvalidParameter(
                "sketched scoring needs a sketched iterate".into(),
            ));
        }
    }
    greedy_step(
        system.base(),
        &ScoreSource::Sketched(system),
        state,
        rng,
        opts,
    )
}

fn validate_config(base: &LinearSystem, config: &SolverConfig) -> Result<()> {
    if config.max_iterations == 0 {
        return Err(Error::InvalidParameter(
            "iteration budget must be at least 1".into(),
        ));
    }
    if config.error_tolerance.is_nan() || config.error_tolerance < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be nonnegative, got {}",
            config.error_tolerance
        )));
    }
    if config.candidate_set_size == Some(0) {
        return Err(Error::InvalidParameter(
            "candidate set size must be at least 1".into(),
        ));
    }
    if config.refresh_period == Some(0) {
        return Err(Error::InvalidParameter(
            "refresh period must be at least 1".into(),
        ));
    }
    if matches!(config.method, Method::Rkjl | Method::Oracle)
        && config.replacement == Replacement::Without
    {
        let s = config.candidate_set_size.unwrap_or(base.cols());
        let available = base.distribution().positive_count();
        if s > available {
            return Err(Error::InvalidParameter(format!(
                "cannot draw {s} distinct rows from {available} with positive weight"
            )));
        }
    }
    Ok(())
}

/// Runs one solve to tolerance or budget.
///
/// The start point defaults to a unit-sphere draw from the seed's
/// start-point stream; row selection draws come from its sampling stream.
/// With a known `solution`, every record carries the distance to it and
/// the stop rule compares that distance against the tolerance; without
/// one, a positive tolerance is checked against the largest row residual
/// each non-skipped step.
pub fn solve(
    input: SolveInput<'_>,
    config: &SolverConfig,
    solution: Option<&RealVector>,
    start: Option<&RealVector>,
) -> Result<SolveTrace> {
    let base = input.base();
    validate_config(base, config)?;
    let sketched_sys = match (config.method, &input) {
        (Method::Rkjl, SolveInput::Sketched(s)) => Some(*s),
        (Method::Rkjl, SolveInput::Plain(_)) => {
            return Err(Error::InvalidParameter(
                "the sketched method needs a sketched system as input".into(),
            ));
        }
        _ => None,
    };
    if let Some(sol) = solution {
        if sol.len() != base.cols() {
            return Err(Error::DimensionMismatch(format!(
                "solution has {} entries but the system has {} columns",
                sol.len(),
                base.cols()
            )));
        }
    }
    let x0 = match start {
        Some(x) => {
            if x.len() != base.cols() {
                return Err(Error::DimensionMismatch(format!(
                    "start point has {} entries but the system has {} columns",
                    x.len(),
                    base.cols()
                )));
            }
            x.clone()
        }
        None => sphere_uniform(
            &mut RngState::new(config.seed, INITIAL_ITERATE_STREAM),
            base.cols(),
        )?,
    };

    let opts = GreedyOptions {
        candidate_count: config.candidate_set_size.unwrap_or(base.cols()),
        replacement: config.replacement,
        test_step: config.test_step_enabled,
    };
    let refresh_period = config.refresh_period.unwrap_or(base.cols());
    let mut timings = PhaseTimings::default();

    let mut state = match sketched_sys {
        Some(sys) => {
            let t = Instant::now();
            let s = IterateState::with_sketch(x0, sys.sketch())?;
            timings.preprocess_ns = nanos_since(t);
            s
        }
        None => IterateState::new(x0),
    };

    let mut records = Vec::with_capacity(config.max_iterations + 1);
    let err0 = solution.map(|sol| distance(state.iterate(), sol));
    let res0 = base.residual_inf(state.iterate())?;
    records.push(TraceRecord {
        iteration: 0,
        row: None,
        error: err0,
        residual: res0,
        elapsed_ns: 0,
        skipped: false,
    });

    let already_done = match err0 {
        Some(e) => e <= config.error_tolerance,
        None => res0 <= config.error_tolerance,
    };
    if already_done {
        return Ok(SolveTrace {
            method: config.method,
            records,
            status: TerminalStatus::Converged,
            timings,
        });
    }

    let mut rng = RngState::new(config.seed, ROW_SAMPLING_STREAM);
    let mut status = TerminalStatus::BudgetExhausted;
    for k in 1..=config.max_iterations {
        let step_start = Instant::now();
        let report = match config.method {
            Method::Cyclic => step_cyclic(base, &mut state)?,
            Method::Rk => step_rk(base, &mut state, &mut rng)?,
            Method::Oracle => step_oracle(base, &mut state, &mut rng, &opts)?,
            Method::Rkjl => step_rkjl(
                sketched_sys.expect("checked at entry"),
                &mut state,
                &mut rng,
                &opts,
            )?,
        };
        timings.add(&report.timings);
        if let Some(sys) = sketched_sys {
            if state.iteration() % refresh_period == 0 {
                let t = Instant::now();
                state.refresh_sketched(sys.sketch())?;
                timings.update_ns += nanos_since(t);
            }
        }
        let err = solution.map(|sol| distance(state.iterate(), sol));
        records.push(TraceRecord {
            iteration: k,
            row: Some(report.row),
            error: err,
            residual: report.residual,
            elapsed_ns: nanos_since(step_start),
            skipped: report.skipped,
        });
        let stop = if report.skipped {
            false
        } else {
            match err {
                Some(e) => e <= config.error_tolerance,
                None => {
                    config.error_tolerance > 0.0
                        && base.residual_inf(state.iterate())? <= config.error_tolerance
                }
            }
        };
        if stop {
            status = TerminalStatus::Converged;
            break;
        }
    }

    Ok(SolveTrace {
        method: config.method,
        records,
        status,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::rng::gaussian_vector;

    fn system(rows: usize, cols: usize, data: Vec<f64>, rhs: Vec<f64>) -> LinearSystem {
        LinearSystem::new(
            DenseMatrix::new(rows, cols, data).unwrap(),
            RealVector::new(rhs).unwrap(),
        )
        .unwrap()
    }

    fn identity_system() -> LinearSystem {
        system(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![1.0, 2.0])
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("greedy".parse::<Method>().is_err());
    }

    #[test]
    fn cyclic_on_axis_rows_solves_in_two_steps() {
        let sys = identity_system();
        let mut state = IterateState::new(RealVector::zeros(2));
        let r1 = step_cyclic(&sys, &mut state).unwrap();
        assert_eq!(r1.row, 0);
        assert_eq!(state.iterate().as_slice(), &[1.0, 0.0]);
        let r2 = step_cyclic(&sys, &mut state).unwrap();
        assert_eq!(r2.row, 1);
        assert_eq!(state.iterate().as_slice(), &[1.0, 2.0]);
        assert_eq!(r2.residual, 2.0);
    }

    #[test]
    fn cyclic_skips_zero_rows_without_moving() {
        let sys = system(2, 2, vec![0.0, 0.0, 1.0, 0.0], vec![5.0, 1.0]);
        let mut state = IterateState::new(RealVector::zeros(2));
        let r = step_cyclic(&sys, &mut state).unwrap();
        assert!(r.skipped);
        assert_eq!(r.row, 0);
        assert_eq!(r.residual, 5.0);
        assert_eq!(state.iterate().as_slice(), &[0.0, 0.0]);
        let r = step_cyclic(&sys, &mut state).unwrap();
        assert!(!r.skipped);
        assert_eq!(state.iterate().as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn projection_lands_on_the_hyperplane() {
        let mut rng = RngState::new(21, 0);
        for _ in 0..50 {
            let row = gaussian_vector(&mut rng, 8, 1.0).unwrap();
            let mut x = gaussian_vector(&mut rng, 8, 1.0).unwrap();
            let rhs = rng.uniform();
            let norm_sq = dot_slices(row.as_slice(), row.as_slice());
            project_onto_row(&mut x, row.as_slice(), rhs, norm_sq).unwrap();
            let gap = (rhs - dot_slices(row.as_slice(), x.as_slice())).abs();
            assert!(gap <= 1e-12, "gap {gap}");
        }
    }

    #[test]
    fn projection_of_satisfied_point_is_identity() {
        let mut x = RealVector::new(vec![3.0, 4.0]).unwrap();
        let row = [1.0, 0.0];
        let r = project_onto_row(&mut x, &row, 3.0, 1.0).unwrap();
        assert_eq!(r, 0.0);
        assert_eq!(x.as_slice(), &[3.0, 4.0]);
    }

    #[test]
    fn projection_rejects_zero_rows() {
        let mut x = RealVector::zeros(2);
        assert!(matches!(
            project_onto_row(&mut x, &[0.0, 0.0], 1.0, 0.0),
            Err(Error::ProjectionUndefined)
        ));
    }

    #[test]
    fn projection_step_is_orthogonal() {
        let mut rng = RngState::new(22, 0);
        for _ in 0..50 {
            let n = 6;
            let a = DenseMatrix::new(
                8,
                n,
                gaussian_vector(&mut rng, 48, 1.0).unwrap().into_vec(),
            )
            .unwrap();
            let sol = gaussian_vector(&mut rng, n, 1.0).unwrap();
            let b = a.matvec(&sol).unwrap();
            let sys = LinearSystem::new(a, b).unwrap();
            let x_old = gaussian_vector(&mut rng, n, 1.0).unwrap();
            let mut state = IterateState::new(x_old.clone());
            step_rk(&sys, &mut state, &mut rng).unwrap();
            let defect = pythagorean_defect(&x_old, state.iterate(), &sol).unwrap();
            assert!(defect.abs() <= 1e-12, "defect {defect}");
        }
    }

    #[test]
    fn max_position_takes_first_of_equals() {
        assert_eq!(position_of_max(&[1.0, 3.0, 3.0, 2.0]), 1);
        assert_eq!(position_of_max(&[0.0, 0.0]), 0);
        assert_eq!(position_of_max(&[-1.0]), 0);
    }

    #[test]
    fn greedy_selects_the_largest_exact_residual() {
        // Unit rows, so scores are plain absolute residuals. From the
        // origin the scores equal |b_i|; row 2 must win.
        let sys = system(
            3,
            3,
            vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            vec![0.5, -1.0, 7.0],
        );
        let opts = GreedyOptions {
            candidate_count: 3,
            replacement: Replacement::Without,
            test_step: true,
        };
        let mut rng = RngState::new(23, 0);
        let mut state = IterateState::new(RealVector::zeros(3));
        let r = step_oracle(&sys, &mut state, &mut rng, &opts).unwrap();
        assert_eq!(r.row, 2);
        assert_eq!(r.residual, 7.0);
        assert_eq!(state.iterate().as_slice(), &[0.0, 0.0, 7.0]);
    }

    #[test]
    fn solver_runs_are_reproducible() {
        let mut rng = RngState::new(24, 0);
        let a = DenseMatrix::new(
            20,
            5,
            gaussian_vector(&mut rng, 100, 1.0).unwrap().into_vec(),
        )
        .unwrap();
        let sol = gaussian_vector(&mut rng, 5, 1.0).unwrap();
        let b = a.matvec(&sol).unwrap();
        let sys = LinearSystem::new(a, b).unwrap();
        for method in [Method::Cyclic, Method::Rk, Method::Oracle] {
            let config = SolverConfig {
                method,
                max_iterations: 40,
                seed: 7,
                ..SolverConfig::default()
            };
            let t1 = solve(SolveInput::Plain(&sys), &config, Some(&sol), None).unwrap();
            let t2 = solve(SolveInput::Plain(&sys), &config, Some(&sol), None).unwrap();
            assert!(t1.path_eq(&t2), "{method} diverged across reruns");
        }
    }

    #[test]
    fn starting_at_the_solution_converges_immediately() {
        let sys = identity_system();
        let sol = RealVector::new(vec![1.0, 2.0]).unwrap();
        let config = SolverConfig {
            method: Method::Rk,
            ..SolverConfig::default()
        };
        let trace = solve(SolveInput::Plain(&sys), &config, Some(&sol), Some(&sol)).unwrap();
        assert_eq!(trace.status, TerminalStatus::Converged);
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.final_error(), Some(0.0));
    }

    #[test]
    fn infinite_tolerance_stops_before_any_step() {
        let sys = identity_system();
        let config = SolverConfig {
            method: Method::Cyclic,
            error_tolerance: f64::INFINITY,
            ..SolverConfig::default()
        };
        let trace = solve(SolveInput::Plain(&sys), &config, None, None).unwrap();
        assert_eq!(trace.status, TerminalStatus::Converged);
        assert_eq!(trace.records.len(), 1);
        assert!(trace.final_error().is_none());
    }

    #[test]
    fn residual_tolerance_stops_without_a_known_solution() {
        let sys = identity_system();
        let config = SolverConfig {
            method: Method::Cyclic,
            error_tolerance: 1e-12,
            max_iterations: 10,
            ..SolverConfig::default()
        };
        let trace = solve(SolveInput::Plain(&sys), &config, None, None).unwrap();
        assert_eq!(trace.status, TerminalStatus::Converged);
        // Two axis rows pin both coordinates exactly.
        assert_eq!(trace.iterations(), 2);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let mut rng = RngState::new(25, 0);
        let a = DenseMatrix::new(
            10,
            4,
            gaussian_vector(&mut rng, 40, 1.0).unwrap().into_vec(),
        )
        .unwrap();
        let sol = gaussian_vector(&mut rng, 4, 1.0).unwrap();
        let b = a.matvec(&sol).unwrap();
        let sys = LinearSystem::new(a, b).unwrap();
        let config = SolverConfig {
            method: Method::Rk,
            max_iterations: 3,
            ..SolverConfig::default()
        };
        let trace = solve(SolveInput::Plain(&sys), &config, Some(&sol), None).unwrap();
        assert_eq!(trace.status, TerminalStatus::BudgetExhausted);
        assert_eq!(trace.iterations(), 3);
        assert_eq!(trace.records.len(), 4);
    }

    #[test]
    fn config_validation_rejects_bad_runs() {
        let sys = identity_system();
        let bad_budget = SolverConfig {
            max_iterations: 0,
            ..SolverConfig::default()
        };
        assert!(solve(SolveInput::Plain(&sys), &bad_budget, None, None).is_err());
        let bad_tol = SolverConfig {
            error_tolerance: f64::NAN,
            ..SolverConfig::default()
        };
        assert!(solve(SolveInput::Plain(&sys), &bad_tol, None, None).is_err());
        let bad_candidates = SolverConfig {
            method: Method::Oracle,
            candidate_set_size: Some(0),
            ..SolverConfig::default()
        };
        assert!(solve(SolveInput::Plain(&sys), &bad_candidates, None, None).is_err());
        let bad_refresh = SolverConfig {
            refresh_period: Some(0),
            ..SolverConfig::default()
        };
        assert!(solve(SolveInput::Plain(&sys), &bad_refresh, None, None).is_err());
        let sketchless = SolverConfig {
            method: Method::Rkjl,
            ..SolverConfig::default()
        };
        assert!(solve(SolveInput::Plain(&sys), &sketchless, None, None).is_err());
        let oversized = SolverConfig {
            method: Method::Oracle,
            candidate_set_size: Some(3),
            replacement: Replacement::Without,
            ..SolverConfig::default()
        };
        assert!(solve(SolveInput::Plain(&sys), &oversized, None, None).is_err());
    }

    #[test]
    fn wrong_start_or_solution_length_is_rejected() {
        let sys = identity_system();
        let config = SolverConfig::default();
        let short = RealVector::new(vec![1.0]).unwrap();
        assert!(solve(SolveInput::Plain(&sys), &config, Some(&short), None).is_err());
        assert!(solve(SolveInput::Plain(&sys), &config, None, Some(&short)).is_err());
    }

    #[test]
    fn error_holds_after_convergence() {
        let sys = identity_system();
        let sol = RealVector::new(vec![1.0, 2.0]).unwrap();
        let config = SolverConfig {
            method: Method::Cyclic,
            error_tolerance: 0.0,
            max_iterations: 50,
            ..SolverConfig::default()
        };
        let trace = solve(SolveInput::Plain(&sys), &config, Some(&sol), None).unwrap();
        assert_eq!(trace.status, TerminalStatus::Converged);
        assert_eq!(trace.iterations(), 2);
        assert_eq!(trace.error_at(2), Some(0.0));
        assert_eq!(trace.error_at(40), Some(0.0));
        assert_eq!(trace.iterations_to_error(1e-9), Some(2));
        assert_eq!(trace.iterations_to_error(-1.0), None);
    }
}
