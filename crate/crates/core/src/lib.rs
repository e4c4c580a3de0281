//! Kaczmarz-family iterative solvers for overdetermined linear systems,
//! with norm-weighted randomized row selection and a sketch-accelerated
//! greedy variant, plus the convergence analysis and experiment harness
//! behind them.

pub mod analysis;
pub mod eigen;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod rng;
pub mod sampling;
pub mod sketch;
pub mod solvers;
pub mod system;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, RealVector};
pub use solvers::{Method, SolveTrace, SolverConfig};
pub use system::LinearSystem;
