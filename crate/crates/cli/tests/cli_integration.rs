//! End-to-end checks of the binary: exit codes, determinism of written
//! files, and the printed numbers the interface promises.

use std::path::Path;
use std::process::{Command, Output};

use kaczmarz::harness::io::write_matrix;
use kaczmarz::DenseMatrix;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_kaczmarz");

fn run(dir: &Path, cli_args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(cli_args)
        .output()
        .expect("binary spawns")
}

fn run_ok(dir: &Path, cli_args: &[&str]) -> String {
    let out = run(dir, cli_args);
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        cli_args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 stdout")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Pulls the value printed after `key: ` from a stdout dump.
fn printed_value(stdout: &str, key: &str) -> String {
    let prefix = format!("{key}: ");
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no `{key}` line in:\n{stdout}"))
        .to_string()
}

#[test]
fn help_exits_zero_for_every_subcommand() {
    let dir = TempDir::new().unwrap();
    for sub in [
        "gen", "solve", "bound", "compare", "sweep", "noise", "plot",
    ] {
        let out = run(dir.path(), &[sub, "--help"]);
        assert_eq!(exit_code(&out), 0, "{sub} --help should exit 0");
    }
    let out = run(dir.path(), &["--help"]);
    assert_eq!(exit_code(&out), 0);
}

#[test]
fn missing_required_flag_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["gen", "--n", "5"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn zero_dimension_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["gen", "--m", "10", "--n", "0"]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(stderr.contains("must be at least 1"), "stderr: {stderr}");
}

#[test]
fn nonexistent_input_exits_one_and_names_the_path() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["solve", "--matrix", "does-not-exist.mat"]);
    assert_eq!(exit_code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(
        stderr.contains("does-not-exist.mat"),
        "stderr should name the path: {stderr}"
    );
}

#[test]
fn generated_files_are_identical_across_reruns() {
    let dir = TempDir::new().unwrap();
    let gen_args = [
        "gen", "--m", "40", "--n", "6", "--seed", "9", "--out-dir",
    ];
    run_ok(dir.path(), &[&gen_args[..], &["first"]].concat());
    run_ok(dir.path(), &[&gen_args[..], &["second"]].concat());
    for name in ["a.mat", "b.vec", "x.vec"] {
        let first = std::fs::read(dir.path().join("first").join(name)).unwrap();
        let second = std::fs::read(dir.path().join("second").join(name)).unwrap();
        assert_eq!(first, second, "{name} differs between identical runs");
    }
}

#[test]
fn homogeneous_mode_writes_only_the_matrix() {
    let dir = TempDir::new().unwrap();
    run_ok(
        dir.path(),
        &[
            "gen", "--m", "12", "--n", "3", "--mode", "homogeneous", "--out-dir", "h",
        ],
    );
    assert!(dir.path().join("h/a.mat").exists());
    assert!(!dir.path().join("h/b.vec").exists());
    assert!(!dir.path().join("h/x.vec").exists());
}

#[test]
fn bound_reports_ten_for_the_identity() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("eye.mat");
    write_matrix(&path, &DenseMatrix::identity(10)).unwrap();
    let stdout = run_ok(dir.path(), &["bound", "--matrix", "eye.mat"]);
    let r: f64 = printed_value(&stdout, "scaled_condition").parse().unwrap();
    assert!((r - 10.0).abs() < 1e-10, "identity ratio should be 10, got {r}");
}

#[test]
fn bound_recommends_the_worked_dimension() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("eye.mat");
    write_matrix(&path, &DenseMatrix::identity(10)).unwrap();
    let stdout = run_ok(
        dir.path(),
        &[
            "bound", "--matrix", "eye.mat", "--delta", "0.5", "--set-size", "2", "--C", "8",
        ],
    );
    assert_eq!(printed_value(&stdout, "recommended_d"), "23");
}

#[test]
fn bound_rejects_rank_deficient_input() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("flat.mat");
    // Every row is a multiple of e1, so the Gram matrix is singular.
    let mut data = vec![0.0; 6 * 4];
    for (i, row) in data.chunks_mut(4).enumerate() {
        row[0] = (i + 1) as f64;
    }
    write_matrix(&path, &DenseMatrix::new(6, 4, data).unwrap()).unwrap();
    let out = run(dir.path(), &["bound", "--matrix", "flat.mat"]);
    assert_eq!(exit_code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(stderr.contains("rank deficient"), "stderr: {stderr}");
}

#[test]
fn bound_curve_file_is_monotone_and_complete() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("eye.mat");
    write_matrix(&path, &DenseMatrix::identity(4)).unwrap();
    run_ok(
        dir.path(),
        &[
            "bound", "--matrix", "eye.mat", "--k-max", "50", "--curve-out", "curve.csv",
        ],
    );
    let text = std::fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("iteration,bound"));
    let values: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 51);
    for pair in values.windows(2) {
        assert!(pair[1] <= pair[0], "bound curve must not increase");
    }
}

#[test]
fn solve_converges_on_a_generated_planted_system() {
    let dir = TempDir::new().unwrap();
    run_ok(
        dir.path(),
        &["gen", "--m", "50", "--n", "6", "--seed", "4", "--out-dir", "."],
    );
    for method in ["cyclic", "rk", "rkjl", "oracle"] {
        let stdout = run_ok(
            dir.path(),
            &[
                "solve", "--matrix", "a.mat", "--rhs", "b.vec", "--solution", "x.vec",
                "--method", method, "--max-iters", "2000", "--tolerance", "1e-9",
            ],
        );
        let err: f64 = printed_value(&stdout, "final_error").parse().unwrap();
        assert!(err <= 1e-9, "{method} should reach tolerance, got {err}");
        if method == "rkjl" {
            let ns: u64 = printed_value(&stdout, "preprocess_ns").parse().unwrap();
            assert!(ns > 0, "sketched solve should report preprocessing time");
        }
    }
}

#[test]
fn compare_output_is_deterministic_and_jobs_invariant() {
    let dir = TempDir::new().unwrap();
    let base = [
        "compare", "--methods", "rk,rkjl", "--m", "40", "--n", "5", "--trials", "3",
        "--max-iters", "150", "--seed", "2",
    ];
    run_ok(
        dir.path(),
        &[&base[..], &["--jobs", "1", "--out", "one.csv", "--svg", "one.svg"]].concat(),
    );
    run_ok(
        dir.path(),
        &[&base[..], &["--jobs", "3", "--out", "three.csv", "--svg", "three.svg"]].concat(),
    );
    let csv_one = std::fs::read(dir.path().join("one.csv")).unwrap();
    let csv_three = std::fs::read(dir.path().join("three.csv")).unwrap();
    assert_eq!(csv_one, csv_three, "worker count must not change the CSV");
    let svg_one = std::fs::read(dir.path().join("one.svg")).unwrap();
    let svg_three = std::fs::read(dir.path().join("three.svg")).unwrap();
    assert_eq!(svg_one, svg_three, "worker count must not change the SVG");

    let text = String::from_utf8(csv_one).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("method,trial,iteration,error,residual,elapsed_ns")
    );
    assert!(text.lines().skip(1).all(|l| l.starts_with("rk,") || l.starts_with("rkjl,")));
}

#[test]
fn sweep_prints_a_crossing_for_each_dimension() {
    let dir = TempDir::new().unwrap();
    let stdout = run_ok(
        dir.path(),
        &[
            "sweep", "--d", "3,6", "--m", "40", "--n", "6", "--trials", "3",
            "--max-iters", "800", "--seed", "8", "--threshold", "1e-4", "--out", "s.csv",
        ],
    );
    assert!(stdout.contains("rkjl-d3:"), "stdout: {stdout}");
    assert!(stdout.contains("rkjl-d6:"), "stdout: {stdout}");
    assert!(dir.path().join("s.csv").exists());
}

#[test]
fn noise_summary_has_bound_and_floor_columns() {
    let dir = TempDir::new().unwrap();
    let stdout = run_ok(
        dir.path(),
        &[
            "noise", "--m", "30", "--n", "4", "--gamma-scale", "0.05", "--trials", "2",
            "--max-iters", "100", "--seed", "3", "--out", "n.csv", "--summary-out", "ns.csv",
        ],
    );
    let floor: f64 = printed_value(&stdout, "noise_floor").parse().unwrap();
    assert!(floor > 0.0);
    let text = std::fs::read_to_string(dir.path().join("ns.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("iteration,mean_error,median_error,bound,floor")
    );
    assert_eq!(text.lines().count(), 102, "header plus one row per iteration");
    let last = text.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    let printed_floor: f64 = fields[4].parse().unwrap();
    assert!((printed_floor - floor).abs() <= f64::EPSILON * floor.abs());
}

#[test]
fn plot_rebuilds_an_svg_from_an_exported_csv() {
    let dir = TempDir::new().unwrap();
    run_ok(
        dir.path(),
        &[
            "compare", "--methods", "rk,oracle", "--m", "30", "--n", "4", "--trials", "2",
            "--max-iters", "80", "--seed", "6", "--out", "c.csv",
        ],
    );
    run_ok(
        dir.path(),
        &[
            "plot", "--input", "c.csv", "--out", "p.svg", "--stat", "mean",
            "--title", "replot check",
        ],
    );
    let svg = std::fs::read_to_string(dir.path().join("p.svg")).unwrap();
    assert!(svg.starts_with("<svg"), "plot should emit an SVG document");
    assert!(svg.contains("replot check"));
    assert!(svg.contains("rk"));
    assert!(svg.contains("oracle"));

    // Re-plotting the same CSV must reproduce the same bytes.
    run_ok(
        dir.path(),
        &[
            "plot", "--input", "c.csv", "--out", "p2.svg", "--stat", "mean",
            "--title", "replot check",
        ],
    );
    let again = std::fs::read_to_string(dir.path().join("p2.svg")).unwrap();
    assert_eq!(svg, again);
}

#[test]
fn solve_trace_round_trips_through_plot() {
    let dir = TempDir::new().unwrap();
    run_ok(
        dir.path(),
        &["gen", "--m", "25", "--n", "4", "--seed", "12", "--out-dir", "."],
    );
    run_ok(
        dir.path(),
        &[
            "solve", "--matrix", "a.mat", "--rhs", "b.vec", "--solution", "x.vec",
            "--method", "rk", "--max-iters", "60", "--trace-out", "t.csv",
        ],
    );
    run_ok(
        dir.path(),
        &["plot", "--input", "t.csv", "--out", "t.svg"],
    );
    assert!(dir.path().join("t.svg").exists());
}
