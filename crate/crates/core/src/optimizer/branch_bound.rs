//! Best-bound branch-and-bound over the LP relaxation, after knapsack rows
//! have been strengthened (see `presolve`).
//!
//! Open nodes carry only their bound tightenings relative to the root. The LP
//! engine keeps the basis of whichever node it solved last and re-optimizes
//! the next node from it with the dual simplex.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;

use super::model::{MilpInstance, ModelError, SolveResult, SolveStatus, SolverOptions};
use super::scalar::Scalar;
use super::presolve::strengthen;
use super::simplex::{outcome_status, LpEngine, LpOutcome};

/// Linked list of bound tightenings from a node back to the root.
struct BoundChange<S> {
    var: usize,
    lower: S,
    upper: S,
    parent: Option<Rc<BoundChange<S>>>,
}

struct OpenNode<S> {
    bound: S,
    bound_key: f64,
    seq: usize,
    changes: Option<Rc<BoundChange<S>>>,
}

impl<S> PartialEq for OpenNode<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<S> Eq for OpenNode<S> {}

impl<S> PartialOrd for OpenNode<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S> Ord for OpenNode<S> {
    // max-heap: smallest bound first, newest node on ties
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound_key
            .total_cmp(&self.bound_key)
            .then(self.seq.cmp(&other.seq))
    }
}

/// Solves a MILP to optimality (within the configured relative gap).
pub fn branch_and_bound<S: Scalar>(
    milp: &MilpInstance<S>,
    opts: &SolverOptions,
) -> Result<SolveResult<S>, ModelError> {
    branch_and_bound_with_incumbent(milp, opts, None)
}

/// Like [`branch_and_bound`], seeded with a known integral-feasible point.
/// The point is ignored if it violates the instance.
pub fn branch_and_bound_with_incumbent<S: Scalar>(
    milp: &MilpInstance<S>,
    opts: &SolverOptions,
    start: Option<&[S]>,
) -> Result<SolveResult<S>, ModelError> {
    milp.validate()?;
    if !milp.has_integrality() {
        return Err(ModelError::NoIntegrality);
    }
    let eff = opts.effective::<S>();
    let int_tol = S::from_config(eff.integrality_tol);
    let feas_tol = S::from_config(eff.feasibility_tol);

    let integral: Vec<usize> = milp
        .variables()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.integral)
        .map(|(j, _)| j)
        .collect();

    let mut incumbent: Option<(S, Vec<S>)> = None;
    if let Some(point) = start {
        if point.len() == milp.num_vars()
            && milp.max_violation(point) <= feas_tol
            && milp.max_fractionality(point) <= int_tol
        {
            incumbent = Some((milp.evaluate_objective(point), point.to_vec()));
        }
    }

    let gap_limit = |obj: &S| S::from_config(eff.gap_tol) * S::max_of(S::one(), obj.abs());

    let strengthened = strengthen(milp, &feas_tol);
    let mut engine = LpEngine::new(&strengthened, &eff);
    let root_bounds: Vec<(Option<S>, Option<S>)> =
        integral.iter().map(|&j| engine.bounds(j)).collect();

    let root = engine.solve_cold();
    let mut total_iterations = engine.iterations;
    match root {
        LpOutcome::Optimal => {}
        LpOutcome::Infeasible => return Ok(finish(milp, incumbent, SolveStatus::Infeasible, None, total_iterations, 1)),
        other => {
            let status = outcome_status(other);
            return Ok(finish(milp, incumbent, status, None, total_iterations, 1));
        }
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let root_obj = engine.objective();
    heap.push(OpenNode {
        bound_key: root_obj.to_f64_lossy(),
        bound: root_obj,
        seq,
        changes: None,
    });
    let mut nodes = 0usize;
    let mut first = true;
    // changes currently applied to the engine
    let mut applied: Vec<usize> = Vec::new();

    while let Some(node) = heap.pop() {
        if let Some((inc, _)) = &incumbent {
            if node.bound.clone() >= inc.clone() - gap_limit(inc) {
                heap.push(node);
                break;
            }
        }
        if nodes >= eff.max_nodes {
            heap.push(node);
            let best = best_bound(&heap, &incumbent);
            return Ok(finish(milp, incumbent, SolveStatus::IterationLimit, best, total_iterations, nodes));
        }
        nodes += 1;

        let outcome = if first {
            first = false;
            LpOutcome::Optimal
        } else {
            for &k in &applied {
                let (l, u) = root_bounds[k].clone();
                engine.set_bounds(integral[k], l, u);
            }
            applied.clear();
            let mut link = node.changes.clone();
            let mut seen: Vec<usize> = Vec::new();
            while let Some(ch) = link {
                // nearest change to the node wins
                if !seen.contains(&ch.var) {
                    seen.push(ch.var);
                    engine.set_bounds(ch.var, Some(ch.lower.clone()), Some(ch.upper.clone()));
                    if let Ok(k) = integral.binary_search(&ch.var) {
                        applied.push(k);
                    }
                }
                link = ch.parent.clone();
            }
            engine.iterations = 0;
            let cutoff = incumbent.as_ref().map(|(inc, _)| inc.clone() - gap_limit(inc));
            let o = engine.solve_warm(cutoff.as_ref());
            total_iterations += engine.iterations;
            o
        };

        match outcome {
            LpOutcome::Optimal => {}
            LpOutcome::Infeasible | LpOutcome::Cutoff => continue,
            LpOutcome::Singular => {
                // fall back to a cold start of this node
                engine.iterations = 0;
                let o = engine.solve_cold();
                total_iterations += engine.iterations;
                match o {
                    LpOutcome::Optimal => {}
                    LpOutcome::Infeasible => continue,
                    other => {
                        heap.push(node);
                        let best = best_bound(&heap, &incumbent);
                        return Ok(finish(milp, incumbent, outcome_status(other), best, total_iterations, nodes));
                    }
                }
            }
            LpOutcome::Unbounded => {
                return Ok(finish(milp, incumbent, SolveStatus::Unbounded, None, total_iterations, nodes));
            }
            LpOutcome::IterationLimit => {
                heap.push(node);
                let best = best_bound(&heap, &incumbent);
                return Ok(finish(milp, incumbent, SolveStatus::IterationLimit, best, total_iterations, nodes));
            }
        }

        let obj = engine.objective();
        if let Some((inc, _)) = &incumbent {
            if obj >= inc.clone() - gap_limit(inc) {
                continue;
            }
        }

        // most fractional integral variable, lowest index on ties
        let half = S::one() / (S::one() + S::one());
        let mut branch: Option<(usize, S)> = None;
        for &j in &integral {
            let v = engine.value(j);
            let frac = v.clone() - v.floor();
            let dist = if frac > half { S::one() - frac } else { frac };
            if dist <= int_tol {
                continue;
            }
            if branch.as_ref().is_none_or(|(_, d)| dist > *d) {
                branch = Some((j, dist));
            }
        }

        let Some((j, _)) = branch else {
            let sol = engine.solution();
            let val = milp.evaluate_objective(&sol);
            if incumbent.as_ref().is_none_or(|(inc, _)| val < *inc) {
                incumbent = Some((val, sol));
            }
            continue;
        };

        let v = engine.value(j).clone();
        let (lo, hi) = engine.bounds(j);
        let lo = lo.expect("integral variables have finite bounds");
        let hi = hi.expect("integral variables have finite bounds");
        let down = v.floor();
        let up = v.ceil();
        for (l, u) in [(up, hi), (lo, down)] {
            seq += 1;
            heap.push(OpenNode {
                bound: obj.clone(),
                bound_key: obj.to_f64_lossy(),
                seq,
                changes: Some(Rc::new(BoundChange {
                    var: j,
                    lower: l,
                    upper: u,
                    parent: node.changes.clone(),
                })),
            });
        }
    }

    let best = best_bound(&heap, &incumbent);
    let status = if incumbent.is_some() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    };
    Ok(finish(milp, incumbent, status, best, total_iterations, nodes))
}

fn best_bound<S: Scalar>(heap: &BinaryHeap<OpenNode<S>>, incumbent: &Option<(S, Vec<S>)>) -> Option<S> {
    let open = heap.iter().map(|n| n.bound.clone()).reduce(|a, b| if b < a { b } else { a });
    match (open, incumbent) {
        (Some(b), Some((inc, _))) => Some(if b < *inc { b } else { inc.clone() }),
        (Some(b), None) => Some(b),
        (None, Some((inc, _))) => Some(inc.clone()),
        (None, None) => None,
    }
}

fn finish<S: Scalar>(
    milp: &MilpInstance<S>,
    incumbent: Option<(S, Vec<S>)>,
    status: SolveStatus,
    best: Option<S>,
    iterations: usize,
    nodes: usize,
) -> SolveResult<S> {
    match incumbent {
        Some((obj, solution)) => {
            let gap = best.map(|b| S::max_of(obj.clone() - b, S::zero()));
            let status = match status {
                SolveStatus::Infeasible => SolveStatus::Optimal,
                s => s,
            };
            debug_assert_eq!(milp.num_vars(), solution.len());
            SolveResult {
                status,
                objective: obj,
                solution,
                bound_gap: gap.or_else(|| Some(S::zero())),
                iterations,
                nodes,
            }
        }
        None => {
            let status = match status {
                SolveStatus::Optimal => SolveStatus::Infeasible,
                s => s,
            };
            let mut r = SolveResult::without_point(status, iterations);
            r.nodes = nodes;
            r
        }
    }
}
