//! Small dense LP/MILP solver: bounded simplex, best-bound branch-and-bound,
//! and an LP-format writer for checking instances with external solvers.

mod branch_bound;
mod lp_format;
mod model;
mod presolve;
mod scalar;
mod simplex;

pub use branch_bound::{branch_and_bound, branch_and_bound_with_incumbent};
pub use lp_format::{export_lp, sanitize_name};
pub use model::{
    Constraint, ConstraintSense, MilpInstance, ModelError, SolveResult, SolveStatus, SolverOptions, VarId, Variable,
};
pub use scalar::{ratio, Scalar};
pub use simplex::{simplex_solve, solve_relaxation};

/// Dispatches on integrality: simplex for pure LPs, branch-and-bound otherwise.
pub fn solve<S: Scalar>(instance: &MilpInstance<S>, opts: &SolverOptions) -> Result<SolveResult<S>, ModelError> {
    if instance.has_integrality() {
        branch_and_bound(instance, opts)
    } else {
        simplex_solve(instance, opts)
    }
}
