//! The closed-form analysis against Monte Carlo reality: conditioning of
//! random instances stays modest, and measured mean squared errors sit
//! under the predicted decay curve.

use kaczmarz::analysis::{rk_error_bound_curve, scaled_condition};
use kaczmarz::harness::{generate_problem, Consistency, EntryModel, ProblemSpec};
use kaczmarz::rng::{derive_seed, RngState};
use kaczmarz::solvers::{solve, SolveInput};
use kaczmarz::{Method, SolverConfig};

/// Tall Gaussian matrices are well conditioned: the squared Frobenius to
/// squared smallest-singular-value ratio stays within a small multiple of
/// the column count.
#[test]
fn random_instances_keep_the_condition_ratio_small() {
    let spec = ProblemSpec {
        rows: 400,
        cols: 50,
        entry_model: EntryModel::Gaussian,
        normalize_rows: false,
        consistency: Consistency::Homogeneous,
        seed: 0,
    };
    for seed in 0..10u64 {
        let problem = generate_problem(&spec, &mut RngState::new(seed, 0)).unwrap();
        let report = scaled_condition(problem.system.matrix()).unwrap();
        let limit = 10.0 * spec.cols as f64;
        assert!(
            report.scaled_condition <= limit,
            "seed {seed} produced condition ratio {}",
            report.scaled_condition
        );
        assert!(report.sigma_min > 0.0);
    }
}

/// Mean squared error over independent runs must track the closed-form
/// decay curve. The factor absorbs Monte Carlo noise at 100 seeds; the
/// bound itself is an expectation, so no single run has to obey it.
#[test]
fn mean_squared_error_obeys_the_decay_curve() {
    const SEEDS: usize = 100;
    const K_MAX: usize = 80;
    const MC_SLACK: f64 = 1.3;
    let spec = ProblemSpec {
        rows: 120,
        cols: 12,
        entry_model: EntryModel::Gaussian,
        normalize_rows: false,
        consistency: Consistency::Homogeneous,
        seed: 8,
    };
    let problem = generate_problem(&spec, &mut RngState::new(8, 0)).unwrap();
    let r = scaled_condition(problem.system.matrix())
        .unwrap()
        .scaled_condition;
    let mut mean_sq = vec![0.0f64; K_MAX + 1];
    for trial in 0..SEEDS {
        let cfg = SolverConfig {
            method: Method::Rk,
            max_iterations: K_MAX,
            seed: derive_seed(5150, trial as u64),
            ..SolverConfig::default()
        };
        let trace = solve(
            SolveInput::Plain(&problem.system),
            &cfg,
            Some(&problem.true_x),
            None,
        )
        .unwrap();
        for (k, slot) in mean_sq.iter_mut().enumerate() {
            let e = trace.error_at(k).unwrap();
            *slot += e * e / SEEDS as f64;
        }
    }
    let curve = rk_error_bound_curve(r, mean_sq[0], K_MAX).unwrap();
    for (k, bound) in curve {
        assert!(
            mean_sq[k] <= MC_SLACK * bound,
            "iteration {k}: mean squared error {} against bound {bound}",
            mean_sq[k]
        );
    }
}
