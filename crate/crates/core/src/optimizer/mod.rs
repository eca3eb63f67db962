//! Exact perimeter minimization.

pub mod bnb;
mod clarabel_backend;
pub mod feasibility;
pub mod model;
pub mod socp;
pub mod subproblem;

pub use bnb::{solve, SolveConfig, WarmStart};
pub use feasibility::{check_feasibility, Violation};
pub use model::{build_model, evaluate_objective, lower_bound, Model, ModelParams, Solution, Status};
pub use subproblem::{solve_subproblem, solve_with, Assignment, Backend, Relation, Subproblem};
