//! Power-minimizing task assignment across a three-tier architecture: a
//! conventional cloud, metro fog servers, and a vehicular cloud of on-board
//! units, with a self-contained LP/MILP solver and a sweep harness.

pub mod architecture;
pub mod catalog;
pub mod config;
pub mod harness;
pub mod optimizer;
pub mod strategies;
pub mod workload;

pub use optimizer::Scalar;

/// Instance over `f64`, the type every domain module works in.
pub type Milp = optimizer::MilpInstance<f64>;
pub type Milp32 = optimizer::MilpInstance<f32>;
/// Exact rational instance, solved without rounding when paired with
/// [`optimizer::SolverOptions::exact`].
pub type ExactMilp = optimizer::MilpInstance<num_rational::BigRational>;
pub type Solution = optimizer::SolveResult<f64>;
pub type Solution32 = optimizer::SolveResult<f32>;
pub type ExactSolution = optimizer::SolveResult<num_rational::BigRational>;
