//! Experiment harness: reproducible random problem instances, multi-trial
//! solver comparisons with closed-form reference curves, and summaries
//! ready for CSV export and plotting.
//!
//! Reproducibility contract: the problem of trial `t` depends only on the
//! problem seed and `t`; the solver randomness of trial `t` depends only
//! on the experiment base seed and `t`. Methods compared in the same trial
//! therefore see the same instance, the same start point, and the same
//! row-selection draws.

pub mod csv;
pub mod io;
pub mod svg;

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Instant;

use crate::analysis::{gamma_of_noise, noisy_rk_bound, scaled_condition};
use crate::error::{Error, Result};
use crate::linalg::{norm2_slice, DenseMatrix, RealVector};
use crate::rng::{derive_seed, gaussian_vector, sphere_uniform, RngState};
use crate::sampling::Replacement;
use crate::sketch::{build_sketch, default_sketch_dim, GaussianSketch, SketchedSystem};
use crate::solvers::{
    nanos_since, solve, Method, SolveInput, SolveTrace, SolverConfig, SKETCH_STREAM,
};
use crate::system::LinearSystem;
use csv::TracePoint;
use svg::{PlotOptions, PlotSeries, Statistic};

/// Distribution of the random matrix entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryModel {
    /// Independent signs, +1 or -1 with equal probability.
    Bernoulli,
    /// Independent standard normals.
    Gaussian,
}

/// How the right-hand side relates to the matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Consistency {
    /// `b = 0`; the solution is the origin.
    Homogeneous,
    /// `b = A x` for a hidden unit-norm `x`.
    Planted,
    /// `b = A x + w` with the noise rescaled so its largest
    /// row-normalized magnitude equals `noise_scale`.
    Noisy { noise_scale: f64 },
}

/// Recipe for one random problem instance.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub rows: usize,
    pub cols: usize,
    pub entry_model: EntryModel,
    /// Rescale every row to unit norm after drawing entries.
    pub normalize_rows: bool,
    pub consistency: Consistency,
    /// Seed of the instance family; trial `t` draws from its stream `t`.
    pub seed: u64,
}

/// A generated instance: the system plus the ground truth behind it.
#[derive(Debug, Clone)]
pub struct Problem {
    pub system: LinearSystem,
    pub true_x: RealVector,
    /// The additive noise, for noisy instances.
    pub noise: Option<RealVector>,
    /// Largest row-normalized noise magnitude actually present.
    pub gamma: Option<f64>,
}

/// Draws one instance of a described problem. Draw order is fixed
/// (entries, then solution, then noise) so generated problems are stable
/// across releases.
pub fn generate_problem(spec: &ProblemSpec, rng: &mut RngState) -> Result<Problem> {
    if spec.cols == 0 || spec.rows < spec.cols {
        return Err(Error::InvalidParameter(format!(
            "need rows >= cols >= 1, got {} x {}",
            spec.rows, spec.cols
        )));
    }
    let count = spec.rows * spec.cols;
    let entries: Vec<f64> = match spec.entry_model {
        EntryModel::Gaussian => gaussian_vector(rng, count, 1.0)?.into_vec(),
        EntryModel::Bernoulli => (0..count)
            .map(|_| if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 })
            .collect(),
    };
    let mut a = DenseMatrix::new(spec.rows, spec.cols, entries)?;
    if spec.normalize_rows {
        for i in 0..spec.rows {
            let row = a.row_mut(i);
            let norm = norm2_slice(row);
            if norm == 0.0 {
                return Err(Error::DegenerateMatrix(format!(
                    "row {i} drew as exactly zero and cannot be normalized"
                )));
            }
            for v in row {
                *v /= norm;
            }
        }
    }

    let (true_x, noise, gamma, b) = match spec.consistency {
        Consistency::Homogeneous => (
            RealVector::zeros(spec.cols),
            None,
            None,
            RealVector::zeros(spec.rows),
        ),
        Consistency::Planted => {
            let x = sphere_uniform(rng, spec.cols)?;
            let b = a.matvec(&x)?;
            (x, None, None, b)
        }
        Consistency::Noisy { noise_scale } => {
            if !noise_scale.is_finite() || noise_scale < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "noise scale must be finite and nonnegative, got {noise_scale}"
                )));
            }
            let x = sphere_uniform(rng, spec.cols)?;
            let clean = a.matvec(&x)?;
            let raw = gaussian_vector(rng, spec.rows, 1.0)?;
            let raw_gamma = gamma_of_noise(&a, &raw)?;
            let scale = if raw_gamma > 0.0 {
                noise_scale / raw_gamma
            } else {
                0.0
            };
            let w = RealVector::new(raw.iter().map(|&v| v * scale).collect())?;
            let gamma = gamma_of_noise(&a, &w)?;
            let b = RealVector::new(
                clean
                    .iter()
                    .zip(w.iter())
                    .map(|(&c, &wi)| c + wi)
                    .collect(),
            )?;
            (x, Some(w), Some(gamma), b)
        }
    };
    Ok(Problem {
        system: LinearSystem::new(a, b)?,
        true_x,
        noise,
        gamma,
    })
}

/// Shared settings of a multi-trial experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub trials: usize,
    /// Solver randomness of trial `t` derives from this and `t`.
    pub base_seed: u64,
    pub max_iterations: usize,
    pub error_tolerance: f64,
    pub candidate_set_size: Option<usize>,
    /// Distortion target used when the sketch dimension is derived.
    pub jl_delta: f64,
    /// Fixed sketch dimension; derived from `jl_delta` when absent.
    pub sketch_dim: Option<usize>,
    pub replacement: Replacement,
    pub test_step_enabled: bool,
    pub refresh_period: Option<usize>,
    /// Worker threads across trials. Results are identical at any level.
    pub jobs: usize,
    /// Replace the random sketch by the identity (requires the sketch
    /// dimension to equal the column count). A control for tests.
    pub identity_sketch: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            trials: 10,
            base_seed: 0,
            max_iterations: 1000,
            error_tolerance: 0.0,
            candidate_set_size: None,
            jl_delta: 0.3,
            sketch_dim: None,
            replacement: Replacement::With,
            test_step_enabled: true,
            refresh_period: None,
            jobs: 1,
            identity_sketch: false,
        }
    }
}

/// All trials of one configuration, labeled for export.
#[derive(Debug, Clone)]
pub struct TraceGroup {
    pub label: String,
    pub traces: Vec<SolveTrace>,
    /// Total sketched-row precomputation time across trials.
    pub preprocess_ns: u64,
}

/// A closed-form curve drawn alongside measured ones.
#[derive(Debug, Clone)]
pub struct ReferenceCurve {
    pub label: String,
    pub points: Vec<(usize, f64)>,
}

/// Everything an experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub spec: ProblemSpec,
    pub groups: Vec<TraceGroup>,
    pub reference: Vec<ReferenceCurve>,
}

impl ExperimentResult {
    pub fn export_csv(&self, path: impl AsRef<Path>, include_timing: bool) -> Result<()> {
        csv::export_traces_csv(&self.groups, path, include_timing)
    }

    /// Summarized series for plotting: one per group, plus the dashed
    /// reference curves.
    pub fn plot_series(&self, statistic: Statistic) -> Result<Vec<PlotSeries>> {
        let mut series = Vec::with_capacity(self.groups.len() + self.reference.len());
        for g in &self.groups {
            let summary = summarize(g)?;
            let values = match statistic {
                Statistic::Median => summary.median,
                Statistic::Mean => summary.mean,
            };
            series.push(PlotSeries {
                label: g.label.clone(),
                points: summary.iterations.into_iter().zip(values).collect(),
                dashed: false,
            });
        }
        for r in &self.reference {
            series.push(PlotSeries {
                label: r.label.clone(),
                points: r.points.clone(),
                dashed: true,
            });
        }
        Ok(series)
    }

    pub fn render_svg(&self, opts: &PlotOptions, path: impl AsRef<Path>) -> Result<()> {
        let doc = svg::svg_document(&self.plot_series(opts.statistic)?, opts)?;
        std::fs::write(path, doc)?;
        Ok(())
    }
}

/// One solver configuration inside an experiment.
struct RunPlan {
    label: String,
    method: Method,
    sketch_dim: Option<usize>,
}

struct PlanOutcome {
    trace: SolveTrace,
    preprocess_ns: u64,
}

fn run_trial(
    spec: &ProblemSpec,
    plans: &[RunPlan],
    cfg: &ExperimentConfig,
    trial: usize,
) -> Result<Vec<PlanOutcome>> {
    let mut problem_rng = RngState::new(spec.seed, trial as u64);
    let problem = generate_problem(spec, &mut problem_rng)?;
    let solver_seed = derive_seed(cfg.base_seed, trial as u64);
    let mut outcomes = Vec::with_capacity(plans.len());
    for plan in plans {
        let config = SolverConfig {
            method: plan.method,
            max_iterations: cfg.max_iterations,
            error_tolerance: cfg.error_tolerance,
            candidate_set_size: cfg.candidate_set_size,
            seed: solver_seed,
            replacement: cfg.replacement,
            test_step_enabled: cfg.test_step_enabled,
            refresh_period: cfg.refresh_period,
        };
        let outcome = if plan.method == Method::Rkjl {
            let n = spec.cols;
            let sketch = if cfg.identity_sketch {
                let d = plan.sketch_dim.unwrap_or(n);
                if d != n {
                    return Err(Error::InvalidParameter(format!(
                        "the identity sketch has dimension {n}, not {d}"
                    )));
                }
                GaussianSketch::identity(n)?
            } else {
                let d = match plan.sketch_dim {
                    Some(d) => d,
                    None => default_sketch_dim(n, cfg.jl_delta)?,
                };
                build_sketch(&mut RngState::new(solver_seed, SKETCH_STREAM), n, d)?
            };
            let start = Instant::now();
            let sketched = SketchedSystem::new(problem.system.clone(), sketch)?;
            let preprocess_ns = nanos_since(start);
            PlanOutcome {
                trace: solve(
                    SolveInput::Sketched(&sketched),
                    &config,
                    Some(&problem.true_x),
                    None,
                )?,
                preprocess_ns,
            }
        } else {
            PlanOutcome {
                trace: solve(
                    SolveInput::Plain(&problem.system),
                    &config,
                    Some(&problem.true_x),
                    None,
                )?,
                preprocess_ns: 0,
            }
        };
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

fn run_plans(
    spec: &ProblemSpec,
    plans: &[RunPlan],
    cfg: &ExperimentConfig,
) -> Result<Vec<TraceGroup>> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter(
            "an experiment needs at least one trial".into(),
        ));
    }
    if plans.is_empty() {
        return Err(Error::InvalidParameter(
            "an experiment needs at least one configuration".into(),
        ));
    }
    let trials = cfg.trials;
    let jobs = cfg.jobs.max(1).min(trials);
    let per_trial: Vec<Option<Result<Vec<PlanOutcome>>>> = if jobs == 1 {
        (0..trials)
            .map(|t| Some(run_trial(spec, plans, cfg, t)))
            .collect()
    } else {
        let slots: Mutex<Vec<Option<Result<Vec<PlanOutcome>>>>> =
            Mutex::new((0..trials).map(|_| None).collect());
        let next = AtomicUsize::new(0);
        thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let t = next.fetch_add(1, Ordering::Relaxed);
                    if t >= trials {
                        break;
                    }
                    let outcome = run_trial(spec, plans, cfg, t);
                    slots.lock().expect("a trial worker panicked")[t] = Some(outcome);
                });
            }
        });
        slots.into_inner().expect("a trial worker panicked")
    };

    let mut groups: Vec<TraceGroup> = plans
        .iter()
        .map(|p| TraceGroup {
            label: p.label.clone(),
            traces: Vec::with_capacity(trials),
            preprocess_ns: 0,
        })
        .collect();
    for slot in per_trial {
        let outcomes = slot.expect("every trial is scheduled exactly once")?;
        for (group, outcome) in groups.iter_mut().zip(outcomes) {
            group.preprocess_ns += outcome.preprocess_ns;
            group.traces.push(outcome.trace);
        }
    }
    Ok(groups)
}

/// Runs every method over the same sequence of instances. Trial `t` of
/// every method sees the same problem, start point, and selection draws.
pub fn run_comparison(
    spec: &ProblemSpec,
    methods: &[Method],
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult> {
    for (i, m) in methods.iter().enumerate() {
        if methods[..i].contains(m) {
            return Err(Error::InvalidParameter(format!(
                "method {m} listed more than once"
            )));
        }
    }
    let plans: Vec<RunPlan> = methods
        .iter()
        .map(|&m| RunPlan {
            label: m.name().to_string(),
            method: m,
            sketch_dim: cfg.sketch_dim,
        })
        .collect();
    let groups = run_plans(spec, &plans, cfg)?;
    Ok(ExperimentResult {
        spec: spec.clone(),
        groups,
        reference: Vec::new(),
    })
}

/// Runs the sketched greedy method once per target dimension, labeled
/// `rkjl-d{dim}`.
pub fn run_d_sweep(
    spec: &ProblemSpec,
    dims: &[usize],
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult> {
    if dims.is_empty() {
        return Err(Error::InvalidParameter(
            "a dimension sweep needs at least one dimension".into(),
        ));
    }
    for (i, d) in dims.iter().enumerate() {
        if dims[..i].contains(d) {
            return Err(Error::InvalidParameter(format!(
                "dimension {d} listed more than once"
            )));
        }
    }
    let plans: Vec<RunPlan> = dims
        .iter()
        .map(|&d| RunPlan {
            label: format!("rkjl-d{d}"),
            method: Method::Rkjl,
            sketch_dim: Some(d),
        })
        .collect();
    let groups = run_plans(spec, &plans, cfg)?;
    Ok(ExperimentResult {
        spec: spec.clone(),
        groups,
        reference: Vec::new(),
    })
}

/// Runs norm-weighted random projection on a single noisy instance over
/// many seeds, alongside the decay-plus-floor bound and the floor itself.
pub fn run_noise_experiment(
    spec: &ProblemSpec,
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult> {
    if !matches!(spec.consistency, Consistency::Noisy { .. }) {
        return Err(Error::InvalidParameter(
            "the noise study needs a noisy problem".into(),
        ));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter(
            "an experiment needs at least one trial".into(),
        ));
    }
    let mut problem_rng = RngState::new(spec.seed, 0);
    let problem = generate_problem(spec, &mut problem_rng)?;
    let gamma = problem.gamma.expect("noisy problems carry their gamma");
    let mut traces = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials {
        let config = SolverConfig {
            method: Method::Rk,
            max_iterations: cfg.max_iterations,
            error_tolerance: cfg.error_tolerance,
            candidate_set_size: None,
            seed: derive_seed(cfg.base_seed, trial as u64),
            replacement: cfg.replacement,
            test_step_enabled: true,
            refresh_period: None,
        };
        traces.push(solve(
            SolveInput::Plain(&problem.system),
            &config,
            Some(&problem.true_x),
            None,
        )?);
    }
    let r = scaled_condition(problem.system.matrix())?.scaled_condition;
    let worst_start = traces
        .iter()
        .filter_map(|t| t.records[0].error)
        .fold(0.0f64, f64::max);
    let bound: Vec<(usize, f64)> = (0..=cfg.max_iterations)
        .map(|k| noisy_rk_bound(r, worst_start, k, gamma).map(|v| (k, v)))
        .collect::<Result<_>>()?;
    let floor_value = r.sqrt() * gamma;
    let floor = (0..=cfg.max_iterations).map(|k| (k, floor_value)).collect();
    Ok(ExperimentResult {
        spec: spec.clone(),
        groups: vec![TraceGroup {
            label: Method::Rk.name().to_string(),
            traces,
            preprocess_ns: 0,
        }],
        reference: vec![
            ReferenceCurve {
                label: "noisy-bound".to_string(),
                points: bound,
            },
            ReferenceCurve {
                label: "noise-floor".to_string(),
                points: floor,
            },
        ],
    })
}

/// Per-iteration summary across trials, holding each trial's last value
/// once it has finished.
#[derive(Debug, Clone)]
pub struct SummaryCurve {
    pub iterations: Vec<usize>,
    pub median: Vec<f64>,
    pub mean: Vec<f64>,
}

fn summarize_metric(trials: &[Vec<f64>]) -> Result<SummaryCurve> {
    if trials.is_empty() || trials.iter().any(Vec::is_empty) {
        return Err(Error::InvalidParameter(
            "summaries need at least one value per trial".into(),
        ));
    }
    let len = trials.iter().map(Vec::len).max().expect("nonempty");
    let mut median = Vec::with_capacity(len);
    let mut mean = Vec::with_capacity(len);
    for k in 0..len {
        let mut values: Vec<f64> = trials.iter().map(|t| t[k.min(t.len() - 1)]).collect();
        // Mean is accumulated in trial order so re-imported traces
        // summarize to the same bits.
        mean.push(values.iter().sum::<f64>() / values.len() as f64);
        values.sort_by(f64::total_cmp);
        let mid = values.len() / 2;
        median.push(if values.len() % 2 == 1 {
            values[mid]
        } else {
            (values[mid - 1] + values[mid]) / 2.0
        });
    }
    Ok(SummaryCurve {
        iterations: (0..len).collect(),
        median,
        mean,
    })
}

fn trace_metric(error: Option<f64>, residual: f64) -> f64 {
    error.unwrap_or(residual)
}

/// Summarizes a trace group, preferring error over residual per record.
pub fn summarize(group: &TraceGroup) -> Result<SummaryCurve> {
    let trials: Vec<Vec<f64>> = group
        .traces
        .iter()
        .map(|t| {
            t.records
                .iter()
                .map(|r| trace_metric(r.error, r.residual))
                .collect()
        })
        .collect();
    summarize_metric(&trials)
}

/// Summarizes imported CSV trials with the same rules as [`summarize`].
pub fn summarize_points(trials: &[Vec<TracePoint>]) -> Result<SummaryCurve> {
    let values: Vec<Vec<f64>> = trials
        .iter()
        .map(|t| {
            t.iter()
                .map(|p| trace_metric(p.error, p.residual))
                .collect()
        })
        .collect();
    summarize_metric(&values)
}

/// Lower median of per-trial first crossings of the error threshold.
/// Trials that never cross count as one past the budget, so the sentinel
/// `budget + 1` means "typically does not converge in time".
pub fn median_iterations_to_error(
    group: &TraceGroup,
    threshold: f64,
    budget: usize,
) -> Result<usize> {
    if group.traces.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "group '{}' has no traces",
            group.label
        )));
    }
    let mut crossings: Vec<usize> = group
        .traces
        .iter()
        .map(|t| t.iterations_to_error(threshold).unwrap_or(budget + 1))
        .collect();
    crossings.sort_unstable();
    Ok(crossings[(crossings.len() - 1) / 2])
}
