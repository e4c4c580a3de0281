//! Subcommand implementations. Everything here delegates to the library;
//! this layer only reads flags, touches the filesystem, and prints
//! summary lines.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use kaczmarz::analysis::{rk_error_bound_curve, scaled_condition};
use kaczmarz::harness::csv::{export_traces_csv, import_traces_csv};
use kaczmarz::harness::io::{read_matrix, read_vector, write_matrix, write_vector};
use kaczmarz::harness::svg::{svg_document, PlotOptions, PlotSeries};
use kaczmarz::harness::{
    generate_problem, median_iterations_to_error, run_comparison, run_d_sweep,
    run_noise_experiment, summarize, summarize_points, Consistency, ExperimentConfig,
    ExperimentResult, ProblemSpec, TraceGroup,
};
use kaczmarz::rng::RngState;
use kaczmarz::sketch::{build_sketch, default_sketch_dim, jl_dimension, SketchedSystem};
use kaczmarz::solvers::{solve, SolveInput, SKETCH_STREAM};
use kaczmarz::{LinearSystem, Method, RealVector, SolverConfig};

use crate::args;

/// Failures split by exit code: flag-level problems exit 2, everything
/// that went wrong while doing the work exits 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<kaczmarz::Error> for CliError {
    fn from(e: kaczmarz::Error) -> Self {
        match e {
            kaczmarz::Error::InvalidParameter(msg) => CliError::Usage(msg),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

/// Attaches the file path to I/O and format failures, which otherwise
/// never name what they were reading.
fn at_path<T>(result: kaczmarz::Result<T>, path: &Path) -> Result<T, CliError> {
    result.map_err(|e| match e {
        kaczmarz::Error::Io(io) => CliError::Runtime(format!("{}: {io}", path.display())),
        kaczmarz::Error::Format { offset, message } => {
            CliError::Runtime(format!("{}: byte {offset}: {message}", path.display()))
        }
        other => other.into(),
    })
}

fn problem_spec(
    flags: &args::ProblemFlags,
    consistency: Consistency,
) -> ProblemSpec {
    ProblemSpec {
        rows: flags.m,
        cols: flags.n,
        entry_model: flags.model.into(),
        normalize_rows: flags.normalize,
        consistency,
        seed: flags.seed,
    }
}

fn experiment_config(
    flags: &args::ProblemFlags,
    solver: &args::SolverFlags,
    trials: usize,
    max_iters: usize,
    sketch_dim: Option<usize>,
    jobs: usize,
) -> ExperimentConfig {
    ExperimentConfig {
        trials,
        base_seed: flags.seed,
        max_iterations: max_iters,
        error_tolerance: solver.tolerance,
        candidate_set_size: solver.s,
        jl_delta: solver.delta,
        sketch_dim,
        replacement: solver.replacement.into(),
        test_step_enabled: !solver.no_test_step,
        refresh_period: solver.refresh,
        jobs,
        identity_sketch: false,
    }
}

fn plot_options(render: &args::RenderFlags) -> PlotOptions {
    PlotOptions {
        title: render.title.clone(),
        statistic: render.stat.into(),
        ..PlotOptions::default()
    }
}

fn export_result(
    result: &ExperimentResult,
    out: &Path,
    render: &args::RenderFlags,
) -> Result<(), CliError> {
    at_path(result.export_csv(out, render.timing), out)?;
    println!("wrote {}", out.display());
    if let Some(svg) = &render.svg {
        at_path(result.render_svg(&plot_options(render), svg), svg)?;
        println!("wrote {}", svg.display());
    }
    Ok(())
}

pub fn gen(a: &args::GenArgs) -> Result<(), CliError> {
    let spec = problem_spec(&a.problem, a.mode.consistency(a.noise_scale));
    let problem = generate_problem(&spec, &mut RngState::new(spec.seed, 0))?;
    std::fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", a.out_dir.display())))?;
    let matrix_path = a.out_dir.join("a.mat");
    at_path(write_matrix(&matrix_path, problem.system.matrix()), &matrix_path)?;
    println!("wrote {}", matrix_path.display());
    if a.mode != args::ModeArg::Homogeneous {
        let rhs_path = a.out_dir.join("b.vec");
        at_path(write_vector(&rhs_path, problem.system.rhs()), &rhs_path)?;
        println!("wrote {}", rhs_path.display());
        let solution_path = a.out_dir.join("x.vec");
        at_path(write_vector(&solution_path, &problem.true_x), &solution_path)?;
        println!("wrote {}", solution_path.display());
    }
    Ok(())
}

pub fn solve_cmd(a: &args::SolveArgs) -> Result<(), CliError> {
    let matrix = at_path(read_matrix(&a.matrix), &a.matrix)?;
    let rhs = match &a.rhs {
        Some(path) => at_path(read_vector(path), path)?,
        None => RealVector::zeros(matrix.rows()),
    };
    let solution = match &a.solution {
        Some(path) => Some(at_path(read_vector(path), path)?),
        None => None,
    };
    let system = LinearSystem::new(matrix, rhs)?;
    let n = system.cols();
    let method: Method = a.method.into();
    let config = SolverConfig {
        method,
        max_iterations: a.max_iters.unwrap_or(10 * n),
        error_tolerance: a.solver.tolerance,
        candidate_set_size: a.solver.s,
        seed: a.seed,
        replacement: a.solver.replacement.into(),
        test_step_enabled: !a.solver.no_test_step,
        refresh_period: a.solver.refresh,
    };
    let mut preprocess_ns = 0u64;
    let trace = if method == Method::Rkjl {
        let d = match a.d {
            Some(d) => d,
            None => default_sketch_dim(n, a.solver.delta)?,
        };
        let sketch = build_sketch(&mut RngState::new(a.seed, SKETCH_STREAM), n, d)?;
        let start = Instant::now();
        let sketched = SketchedSystem::new(system.clone(), sketch)?;
        preprocess_ns = start.elapsed().as_nanos() as u64;
        solve(SolveInput::Sketched(&sketched), &config, solution.as_ref(), None)?
    } else {
        solve(SolveInput::Plain(&system), &config, solution.as_ref(), None)?
    };
    println!("method: {method}");
    println!("iterations: {}", trace.iterations());
    println!("status: {}", trace.status);
    if let Some(error) = trace.final_error() {
        println!("final_error: {error:.16e}");
    }
    println!("final_residual: {:.16e}", trace.final_residual());
    if method == Method::Rkjl {
        println!("preprocess_ns: {preprocess_ns}");
    }
    if let Some(path) = &a.trace_out {
        let group = TraceGroup {
            label: method.name().to_string(),
            traces: vec![trace],
            preprocess_ns,
        };
        at_path(export_traces_csv(&[group], path, a.timing), path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn bound(a: &args::BoundArgs) -> Result<(), CliError> {
    let matrix = at_path(read_matrix(&a.matrix), &a.matrix)?;
    let report = scaled_condition(&matrix)?;
    let set_size = a
        .set_size
        .unwrap_or_else(|| 10usize.saturating_mul(matrix.cols()).saturating_mul(matrix.cols()));
    let recommended = jl_dimension(a.delta, set_size, a.c)?;
    println!("rows: {}", matrix.rows());
    println!("cols: {}", matrix.cols());
    println!("frobenius_sq: {:.16e}", report.frobenius_sq);
    println!("sigma_min: {:.16e}", report.sigma_min);
    println!("scaled_condition: {:.16e}", report.scaled_condition);
    println!("recommended_d: {recommended}");
    if let Some(path) = &a.curve_out {
        let curve = rk_error_bound_curve(report.scaled_condition, a.initial_error_sq, a.k_max)?;
        let mut text = String::from("iteration,bound\n");
        for (k, value) in curve {
            writeln!(text, "{k},{value:.16e}").expect("string write");
        }
        std::fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn compare(a: &args::CompareArgs) -> Result<(), CliError> {
    let methods: Vec<Method> = a.methods.iter().map(|&m| m.into()).collect();
    let spec = problem_spec(&a.problem, a.mode.consistency(a.noise_scale));
    let cfg = experiment_config(&a.problem, &a.solver, a.trials, a.max_iters, a.d, a.jobs);
    let result = run_comparison(&spec, &methods, &cfg)?;
    for group in &result.groups {
        let summary = summarize(group)?;
        println!(
            "{}: trials={} median_final={:.6e}",
            group.label,
            group.traces.len(),
            summary.median.last().expect("nonempty summary")
        );
    }
    export_result(&result, &a.out, &a.render)
}

pub fn sweep(a: &args::SweepArgs) -> Result<(), CliError> {
    let spec = problem_spec(&a.problem, a.mode.consistency(a.noise_scale));
    let cfg = experiment_config(&a.problem, &a.solver, a.trials, a.max_iters, None, a.jobs);
    let result = run_d_sweep(&spec, &a.d, &cfg)?;
    for group in &result.groups {
        let crossing = median_iterations_to_error(group, a.threshold, cfg.max_iterations)?;
        let verdict = if crossing > cfg.max_iterations {
            "did not converge".to_string()
        } else {
            format!("{crossing}")
        };
        println!(
            "{}: median_iterations_to_{:e} = {verdict}",
            group.label, a.threshold
        );
    }
    export_result(&result, &a.out, &a.render)
}

pub fn noise(a: &args::NoiseArgs) -> Result<(), CliError> {
    let spec = problem_spec(
        &a.problem,
        Consistency::Noisy {
            noise_scale: a.gamma_scale,
        },
    );
    let cfg = ExperimentConfig {
        trials: a.trials,
        base_seed: a.problem.seed,
        max_iterations: a.max_iters,
        ..ExperimentConfig::default()
    };
    let result = run_noise_experiment(&spec, &cfg)?;
    let floor = result.reference[1].points[0].1;
    println!("noise_floor: {floor:.16e}");
    if let Some(path) = &a.summary_out {
        let summary = summarize(&result.groups[0])?;
        let bound = &result.reference[0].points;
        let floor_curve = &result.reference[1].points;
        let mut text = String::from("iteration,mean_error,median_error,bound,floor\n");
        let held = |v: &[f64], k: usize| v[k.min(v.len() - 1)];
        for k in 0..=cfg.max_iterations {
            writeln!(
                text,
                "{k},{:.16e},{:.16e},{:.16e},{:.16e}",
                held(&summary.mean, k),
                held(&summary.median, k),
                bound[k].1,
                floor_curve[k].1,
            )
            .expect("string write");
        }
        std::fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    export_result(&result, &a.out, &a.render)
}

pub fn plot(a: &args::PlotArgs) -> Result<(), CliError> {
    let groups = at_path(import_traces_csv(&a.input), &a.input)?;
    if groups.is_empty() {
        return Err(CliError::Runtime(format!(
            "{}: no trace rows to plot",
            a.input.display()
        )));
    }
    let statistic = a.stat.into();
    let mut series = Vec::with_capacity(groups.len());
    for group in &groups {
        let summary = summarize_points(&group.trials)?;
        let values = match statistic {
            kaczmarz::harness::svg::Statistic::Median => summary.median,
            kaczmarz::harness::svg::Statistic::Mean => summary.mean,
        };
        series.push(PlotSeries {
            label: group.label.clone(),
            points: summary.iterations.into_iter().zip(values).collect(),
            dashed: false,
        });
    }
    let opts = PlotOptions {
        title: a.title.clone(),
        statistic,
        ..PlotOptions::default()
    };
    let doc = svg_document(&series, &opts)?;
    std::fs::write(&a.out, doc)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", a.out.display())))?;
    println!("wrote {}", a.out.display());
    Ok(())
}
