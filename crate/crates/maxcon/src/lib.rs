//! temporary build scaffold
pub mod lp;
pub use lp::{solve_lp, LinearProgram, LpError, LpSolution, LpStatus, SolverTolerances};
