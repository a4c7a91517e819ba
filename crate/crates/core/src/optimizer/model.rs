use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintSense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for ConstraintSense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintSense::Le => "<=",
            ConstraintSense::Eq => "=",
            ConstraintSense::Ge => ">=",
        })
    }
}

/// A decision variable. `None` bounds are infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Variable<S> {
    pub name: String,
    pub lower: Option<S>,
    pub upper: Option<S>,
    pub integral: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<S> {
    pub name: String,
    pub terms: Vec<(VarId, S)>,
    pub sense: ConstraintSense,
    pub rhs: S,
}

/// Minimization problem with linear objective and constraints; variables
/// flagged `integral` make it a MILP.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpInstance<S> {
    pub name: String,
    variables: Vec<Variable<S>>,
    objective: Vec<S>,
    objective_constant: S,
    constraints: Vec<Constraint<S>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("constraint `{constraint}` references undeclared variable index {index}")]
    UnknownVariable { constraint: String, index: usize },
    #[error("integral variable `{0}` needs finite lower and upper bounds")]
    UnboundedIntegral(String),
    #[error("variable `{0}` has lower bound above upper bound")]
    EmptyDomain(String),
    #[error("instance has integral variables; use branch_and_bound")]
    HasIntegrality,
    #[error("instance has no integral variables; use simplex_solve")]
    NoIntegrality,
}

impl<S: Scalar> MilpInstance<S> {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            variables: Vec::new(),
            objective: Vec::new(),
            objective_constant: S::zero(),
            constraints: Vec::new(),
        }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: Option<S>,
        upper: Option<S>,
        integral: bool,
    ) -> VarId {
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
            integral,
        });
        self.objective.push(S::zero());
        VarId(self.variables.len() - 1)
    }

    /// Non-negative continuous variable.
    pub fn add_continuous(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, Some(S::zero()), None, false)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, Some(S::zero()), Some(S::one()), true)
    }

    pub fn set_objective(&mut self, var: VarId, coeff: S) {
        self.objective[var.0] = coeff;
    }

    pub fn set_objective_constant(&mut self, constant: S) {
        self.objective_constant = constant;
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, S)>,
        sense: ConstraintSense,
        rhs: S,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            sense,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_bounds(&mut self, var: VarId, lower: Option<S>, upper: Option<S>) {
        let v = &mut self.variables[var.0];
        v.lower = lower;
        v.upper = upper;
    }

    pub fn variables(&self) -> &[Variable<S>] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint<S>] {
        &self.constraints
    }

    pub fn objective(&self) -> &[S] {
        &self.objective
    }

    pub fn objective_constant(&self) -> &S {
        &self.objective_constant
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn has_integrality(&self) -> bool {
        self.variables.iter().any(|v| v.integral)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for v in &self.variables {
            if v.integral && (v.lower.is_none() || v.upper.is_none()) {
                return Err(ModelError::UnboundedIntegral(v.name.clone()));
            }
            if let (Some(l), Some(u)) = (&v.lower, &v.upper) {
                if l > u {
                    return Err(ModelError::EmptyDomain(v.name.clone()));
                }
            }
        }
        for c in &self.constraints {
            if let Some((id, _)) = c.terms.iter().find(|(id, _)| id.0 >= self.variables.len()) {
                return Err(ModelError::UnknownVariable {
                    constraint: c.name.clone(),
                    index: id.0,
                });
            }
        }
        Ok(())
    }

    pub fn evaluate_objective(&self, solution: &[S]) -> S {
        self.objective
            .iter()
            .zip(solution)
            .fold(self.objective_constant.clone(), |acc, (c, x)| acc + c.clone() * x.clone())
    }

    pub fn row_activity(&self, row: usize, solution: &[S]) -> S {
        self.constraints[row]
            .terms
            .iter()
            .fold(S::zero(), |acc, (id, a)| acc + a.clone() * solution[id.0].clone())
    }

    /// Largest violation of any constraint or variable bound by `solution`.
    pub fn max_violation(&self, solution: &[S]) -> S {
        let mut worst = S::zero();
        for (row, c) in self.constraints.iter().enumerate() {
            let act = self.row_activity(row, solution);
            let v = match c.sense {
                ConstraintSense::Le => act - c.rhs.clone(),
                ConstraintSense::Ge => c.rhs.clone() - act,
                ConstraintSense::Eq => (act - c.rhs.clone()).abs(),
            };
            worst = S::max_of(worst, v);
        }
        for (v, x) in self.variables.iter().zip(solution) {
            if let Some(l) = &v.lower {
                worst = S::max_of(worst, l.clone() - x.clone());
            }
            if let Some(u) = &v.upper {
                worst = S::max_of(worst, x.clone() - u.clone());
            }
        }
        worst
    }

    /// Largest distance of an integral variable from the nearest integer.
    pub fn max_fractionality(&self, solution: &[S]) -> S {
        let half = S::one() / (S::one() + S::one());
        self.variables
            .iter()
            .zip(solution)
            .filter(|(v, _)| v.integral)
            .map(|(_, x)| {
                let nearest = (x.clone() + half.clone()).floor();
                (x.clone() - nearest).abs()
            })
            .fold(S::zero(), S::max_of)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::Infeasible => "Infeasible",
            SolveStatus::Unbounded => "Unbounded",
            SolveStatus::IterationLimit => "IterationLimit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<S> {
    pub status: SolveStatus,
    pub objective: S,
    /// One value per declared variable; empty when no point is known.
    pub solution: Vec<S>,
    /// Incumbent minus best bound, for branch-and-bound solves.
    pub bound_gap: Option<S>,
    pub iterations: usize,
    pub nodes: usize,
}

impl<S: Scalar> SolveResult<S> {
    pub(crate) fn without_point(status: SolveStatus, iterations: usize) -> Self {
        Self {
            status,
            objective: S::zero(),
            solution: Vec::new(),
            bound_gap: None,
            iterations,
            nodes: 0,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Numeric knobs shared by the LP and MILP routines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub integrality_tol: f64,
    /// Relative gap, scaled by `max(1, |objective|)`.
    pub gap_tol: f64,
    pub pivot_tol: f64,
    /// LP iteration cap is `iteration_factor * (rows + cols)`.
    pub iteration_factor: usize,
    pub max_nodes: usize,
    /// Pivots between refactorizations of the basis inverse.
    pub refactor_interval: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-9,
            integrality_tol: 1e-6,
            gap_tol: 1e-6,
            pivot_tol: 1e-7,
            iteration_factor: 100,
            max_nodes: 1_000_000,
            refactor_interval: 64,
        }
    }
}

impl SolverOptions {
    /// Options with the scalar's tolerance floor applied.
    pub fn effective<S: Scalar>(&self) -> Self {
        let floor = S::TOLERANCE_FLOOR;
        Self {
            feasibility_tol: self.feasibility_tol.max(floor),
            optimality_tol: self.optimality_tol.max(floor),
            integrality_tol: self.integrality_tol.max(floor),
            gap_tol: self.gap_tol.max(floor),
            pivot_tol: self.pivot_tol.max(floor * 1e-2),
            ..self.clone()
        }
    }

    /// Options for exact arithmetic: every tolerance zero.
    pub fn exact() -> Self {
        Self {
            feasibility_tol: 0.0,
            optimality_tol: 0.0,
            integrality_tol: 0.0,
            gap_tol: 0.0,
            pivot_tol: 0.0,
            ..Self::default()
        }
    }
}
