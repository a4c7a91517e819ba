//! Strengthening of knapsack rows over binaries before branch-and-bound.
//!
//! For a row `sum a_i x_i <= b` with binary `x_i` and `a_i >= 0`:
//! a variable with `a_i > b` is fixed at zero; if at most `k` of the items fit
//! together, `sum x_i <= k` is added; and a set of items no two of which fit
//! together yields the clique row `sum x_i <= 1`. Each derived row holds for
//! every integral point of the row, so the integer feasible set is unchanged
//! while the relaxation gets tighter.

use super::model::{ConstraintSense, MilpInstance, VarId};
use super::scalar::Scalar;

pub(crate) fn strengthen<S: Scalar>(milp: &MilpInstance<S>, feas_tol: &S) -> MilpInstance<S> {
    let mut out = milp.clone();
    let is_free_binary = |m: &MilpInstance<S>, j: usize| {
        let v = &m.variables()[j];
        v.integral && v.lower.as_ref().is_some_and(|l| l.is_zero()) && v.upper.as_ref().is_some_and(|u| u.is_one())
    };
    let is_zero_binary = |m: &MilpInstance<S>, j: usize| {
        let v = &m.variables()[j];
        v.integral && v.lower.as_ref().is_some_and(|l| l.is_zero()) && v.upper.as_ref().is_some_and(|u| u.is_zero())
    };

    let mut derived: Vec<(String, Vec<VarId>, usize)> = Vec::new();
    for c in milp.constraints() {
        if c.sense != ConstraintSense::Le || c.rhs < S::zero() {
            continue;
        }
        let mut items: Vec<(usize, S)> = Vec::with_capacity(c.terms.len());
        for (id, a) in &c.terms {
            match items.iter_mut().find(|(j, _)| *j == id.0) {
                Some(entry) => entry.1 = entry.1.clone() + a.clone(),
                None => items.push((id.0, a.clone())),
            }
        }
        if items.iter().any(|(_, a)| *a < S::zero()) {
            continue;
        }
        if !items.iter().all(|(j, _)| is_free_binary(&out, *j) || is_zero_binary(&out, *j)) {
            continue;
        }
        // slack keeps every derived row valid for points the solver accepts
        let cap = c.rhs.clone() + feas_tol.clone() * S::max_of(S::one(), c.rhs.abs());
        items.retain(|(j, a)| {
            if is_zero_binary(&out, *j) || a.is_zero() {
                return false;
            }
            if *a > cap {
                out.set_bounds(VarId(*j), Some(S::zero()), Some(S::zero()));
                return false;
            }
            true
        });
        if items.len() < 2 {
            continue;
        }

        items.sort_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(std::cmp::Ordering::Equal).then(x.0.cmp(&y.0)));
        let mut fit = 0usize;
        let mut total = S::zero();
        for (_, a) in &items {
            total = total + a.clone();
            if total > cap {
                break;
            }
            fit += 1;
        }
        if fit < items.len() {
            let vars = items.iter().map(|(j, _)| VarId(*j)).collect();
            derived.push((format!("card_{}", c.name), vars, fit));
        }
        if fit <= 1 {
            continue;
        }

        // largest items first; grow while the two smallest members still clash
        let mut clique: Vec<usize> = Vec::new();
        for k in (0..items.len()).rev() {
            if let Some(&smallest) = clique.last() {
                let last = &items[smallest].1;
                if !(last.clone() + items[k].1.clone() > cap) {
                    break;
                }
            }
            clique.push(k);
        }
        if clique.len() >= 2 {
            let vars = clique.iter().map(|&k| VarId(items[k].0)).collect();
            derived.push((format!("clique_{}", c.name), vars, 1));
        }
    }

    // identical rows would make some bases singular
    let mut seen: Vec<(Vec<VarId>, usize)> = Vec::new();
    for (name, mut vars, k) in derived {
        vars.sort();
        if seen.iter().any(|(v, kk)| *kk == k && *v == vars) {
            continue;
        }
        seen.push((vars.clone(), k));
        let terms = vars.into_iter().map(|v| (v, S::one())).collect();
        let rhs = S::from_usize(k).expect("small count");
        out.add_constraint(name, terms, ConstraintSense::Le, rhs);
    }
    out
}
