//! Periodic equilibrium solves and convergence-rate experiments.

mod fit;
mod solver;
mod study;

pub use fit::{fit_slope, SlopeFit};
pub use solver::{left_null_vector, project_out, solve_equilibrium, BorderedSolver};
pub use study::{convergence_study, ConvergenceRow, ConvergenceTable, StudyPoint};
