//! Flag definitions. Every subcommand uses explicit long flags; the only
//! positional-free exception is none at all, so invocations paste cleanly
//! into scripts and docs.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kaczmarz::harness::svg::Statistic;
use kaczmarz::harness::{Consistency, EntryModel};
use kaczmarz::sampling::Replacement;
use kaczmarz::Method;

fn positive(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|_| format!("'{s}' is not a count"))?;
    if v == 0 {
        return Err("must be at least 1".to_string());
    }
    Ok(v)
}

#[derive(Parser)]
#[command(
    name = "kaczmarz",
    version,
    about = "Row-action solvers for overdetermined linear systems, with \
             norm-weighted random and sketched greedy row selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a random problem instance as binary matrix/vector files.
    Gen(GenArgs),
    /// Run one solver on a system read from disk.
    Solve(SolveArgs),
    /// Report conditioning and the recommended sketch dimension.
    Bound(BoundArgs),
    /// Run several methods over the same random instances.
    Compare(CompareArgs),
    /// Run the sketched greedy method across target dimensions.
    Sweep(SweepArgs),
    /// Study convergence floors on a noisy instance.
    Noise(NoiseArgs),
    /// Re-plot a previously exported trace CSV.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Cyclic,
    Rk,
    Rkjl,
    Oracle,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Cyclic => Method::Cyclic,
            MethodArg::Rk => Method::Rk,
            MethodArg::Rkjl => Method::Rkjl,
            MethodArg::Oracle => Method::Oracle,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModelArg {
    Bernoulli,
    Gaussian,
}

impl From<ModelArg> for EntryModel {
    fn from(m: ModelArg) -> EntryModel {
        match m {
            ModelArg::Bernoulli => EntryModel::Bernoulli,
            ModelArg::Gaussian => EntryModel::Gaussian,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Homogeneous,
    Planted,
    Noisy,
}

impl ModeArg {
    pub fn consistency(self, noise_scale: f64) -> Consistency {
        match self {
            ModeArg::Homogeneous => Consistency::Homogeneous,
            ModeArg::Planted => Consistency::Planted,
            ModeArg::Noisy => Consistency::Noisy { noise_scale },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ReplacementArg {
    With,
    Without,
}

impl From<ReplacementArg> for Replacement {
    fn from(r: ReplacementArg) -> Replacement {
        match r {
            ReplacementArg::With => Replacement::With,
            ReplacementArg::Without => Replacement::Without,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
pub enum StatArg {
    Median,
    Mean,
}

impl From<StatArg> for Statistic {
    fn from(s: StatArg) -> Statistic {
        match s {
            StatArg::Median => Statistic::Median,
            StatArg::Mean => Statistic::Mean,
        }
    }
}

/// Shape and randomness of a generated instance family.
#[derive(Args)]
pub struct ProblemFlags {
    /// Number of rows (equations).
    #[arg(long, value_parser = positive)]
    pub m: usize,
    /// Number of columns (unknowns).
    #[arg(long, value_parser = positive)]
    pub n: usize,
    /// Distribution of matrix entries.
    #[arg(long, value_enum, default_value_t = ModelArg::Gaussian)]
    pub model: ModelArg,
    /// Rescale every row to unit norm.
    #[arg(long)]
    pub normalize: bool,
    /// Seed for the instance family and solver randomness.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Solver knobs shared by the experiment subcommands.
#[derive(Args)]
pub struct SolverFlags {
    /// Stop once the error (or residual, without a known solution)
    /// reaches this value; 0 disables early stopping.
    #[arg(long, default_value_t = 0.0)]
    pub tolerance: f64,
    /// Candidate rows per greedy iteration (default: the column count).
    #[arg(long, value_parser = positive)]
    pub s: Option<usize>,
    /// Distortion target used when the sketch dimension is derived.
    #[arg(long, default_value_t = 0.3)]
    pub delta: f64,
    /// Candidate sampling policy for the greedy methods.
    #[arg(long, value_enum, default_value_t = ReplacementArg::With)]
    pub replacement: ReplacementArg,
    /// Skip the exact rescoring guard before each greedy projection.
    #[arg(long)]
    pub no_test_step: bool,
    /// Sketched-iterate refresh cadence (default: the column count).
    #[arg(long, value_parser = positive)]
    pub refresh: Option<usize>,
}

/// Plot and export controls shared by the experiment subcommands.
#[derive(Args)]
pub struct RenderFlags {
    /// Also render the summary curves to this SVG path.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Statistic drawn per iteration.
    #[arg(long, value_enum, default_value_t = StatArg::Median)]
    pub stat: StatArg,
    /// Plot title.
    #[arg(long, default_value = "")]
    pub title: String,
    /// Write real elapsed nanoseconds into the trace CSV. Breaks
    /// byte-identical reruns; off by default.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub problem: ProblemFlags,
    /// Right-hand-side construction.
    #[arg(long, value_enum, default_value_t = ModeArg::Planted)]
    pub mode: ModeArg,
    /// Largest row-normalized noise magnitude (noisy mode only).
    #[arg(long, default_value_t = 0.01)]
    pub noise_scale: f64,
    /// Directory receiving a.mat (plus b.vec and x.vec when the mode
    /// defines them).
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct SolveArgs {
    /// Matrix file (binary format).
    #[arg(long)]
    pub matrix: PathBuf,
    /// Right-hand-side vector file; defaults to the zero vector.
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    /// Known solution vector file; enables error reporting and
    /// error-based stopping.
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Rk)]
    pub method: MethodArg,
    /// Sketch target dimension (rkjl only; derived from --delta when
    /// absent).
    #[arg(long, value_parser = positive)]
    pub d: Option<usize>,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Projection budget; defaults to 10x the column count.
    #[arg(long, value_parser = positive)]
    pub max_iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the iteration trace to this CSV path.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
    /// Write real elapsed nanoseconds into the trace CSV.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args)]
pub struct BoundArgs {
    /// Matrix file (binary format).
    #[arg(long)]
    pub matrix: PathBuf,
    /// Distortion target for the dimension recommendation.
    #[arg(long, default_value_t = 0.3)]
    pub delta: f64,
    /// Point-set size the recommendation covers (default: 10 n^2).
    #[arg(long, value_parser = positive)]
    pub set_size: Option<usize>,
    /// Dimension constant.
    #[arg(long = "C", default_value_t = 8.0)]
    pub c: f64,
    /// Write the expected-decay curve to this CSV path.
    #[arg(long)]
    pub curve_out: Option<PathBuf>,
    /// Iterations covered by the curve.
    #[arg(long, default_value_t = 1000, value_parser = positive)]
    pub k_max: usize,
    /// Squared start distance the curve decays from.
    #[arg(long, default_value_t = 1.0)]
    pub initial_error_sq: f64,
}

#[derive(Args)]
pub struct CompareArgs {
    /// Comma-separated methods to run over the same instances.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub methods: Vec<MethodArg>,
    #[command(flatten)]
    pub problem: ProblemFlags,
    /// Right-hand-side construction.
    #[arg(long, value_enum, default_value_t = ModeArg::Planted)]
    pub mode: ModeArg,
    /// Largest row-normalized noise magnitude (noisy mode only).
    #[arg(long, default_value_t = 0.01)]
    pub noise_scale: f64,
    /// Independent trials per method.
    #[arg(long, default_value_t = 10, value_parser = positive)]
    pub trials: usize,
    /// Projection budget per run.
    #[arg(long, default_value_t = 1000, value_parser = positive)]
    pub max_iters: usize,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Sketch target dimension for rkjl (derived from --delta when
    /// absent).
    #[arg(long, value_parser = positive)]
    pub d: Option<usize>,
    /// Worker threads across trials (results identical at any level).
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub jobs: usize,
    /// Trace CSV output path.
    #[arg(long, default_value = "compare.csv")]
    pub out: PathBuf,
    #[command(flatten)]
    pub render: RenderFlags,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Comma-separated sketch target dimensions.
    #[arg(long, value_delimiter = ',', required = true, value_parser = positive)]
    pub d: Vec<usize>,
    #[command(flatten)]
    pub problem: ProblemFlags,
    /// Right-hand-side construction.
    #[arg(long, value_enum, default_value_t = ModeArg::Planted)]
    pub mode: ModeArg,
    /// Largest row-normalized noise magnitude (noisy mode only).
    #[arg(long, default_value_t = 0.01)]
    pub noise_scale: f64,
    /// Independent trials per dimension.
    #[arg(long, default_value_t = 10, value_parser = positive)]
    pub trials: usize,
    /// Projection budget per run.
    #[arg(long, default_value_t = 1000, value_parser = positive)]
    pub max_iters: usize,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Error level the reported iteration counts refer to.
    #[arg(long, default_value_t = 1e-3)]
    pub threshold: f64,
    /// Worker threads across trials.
    #[arg(long, default_value_t = 1, value_parser = positive)]
    pub jobs: usize,
    /// Trace CSV output path.
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
    #[command(flatten)]
    pub render: RenderFlags,
}

#[derive(Args)]
pub struct NoiseArgs {
    #[command(flatten)]
    pub problem: ProblemFlags,
    /// Largest row-normalized noise magnitude of the instance.
    #[arg(long, default_value_t = 0.01)]
    pub gamma_scale: f64,
    /// Independent solver seeds on the one noisy instance.
    #[arg(long, default_value_t = 10, value_parser = positive)]
    pub trials: usize,
    /// Projection budget per run.
    #[arg(long, default_value_t = 1000, value_parser = positive)]
    pub max_iters: usize,
    /// Trace CSV output path.
    #[arg(long, default_value = "noise.csv")]
    pub out: PathBuf,
    /// Write per-iteration summary columns (mean, median, bound, floor)
    /// to this CSV path.
    #[arg(long)]
    pub summary_out: Option<PathBuf>,
    #[command(flatten)]
    pub render: RenderFlags,
}

#[derive(Args)]
pub struct PlotArgs {
    /// Trace CSV produced by solve, compare, sweep, or noise.
    #[arg(long)]
    pub input: PathBuf,
    /// SVG output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Statistic drawn per iteration.
    #[arg(long, value_enum, default_value_t = StatArg::Median)]
    pub stat: StatArg,
    /// Plot title.
    #[arg(long, default_value = "")]
    pub title: String,
}
