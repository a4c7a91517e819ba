//! Bounded-variable simplex over a dense basis inverse.
//!
//! Every constraint row gets a slack (for inequalities) and an artificial
//! column. Phase one minimizes the sum of artificials from the all-artificial
//! basis; afterwards artificials are fixed at zero and stay in the column set,
//! so any later basis (including warm starts inside branch-and-bound) lives in
//! one fixed column space. Variable bounds are handled implicitly: nonbasic
//! columns sit at a finite bound (or at zero when free).
//!
//! Pricing is Dantzig's rule; after a run of degenerate pivots the engine
//! switches to Bland's smallest-index rule until progress resumes, which rules
//! out cycling.

use super::model::{ConstraintSense, MilpInstance, ModelError, SolveResult, SolveStatus, SolverOptions};
use super::scalar::Scalar;

const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    FreeZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// Dual simplex objective crossed the supplied cutoff.
    Cutoff,
    /// Basis matrix became numerically singular.
    Singular,
}

struct Tolerances<S> {
    feas: S,
    opt: S,
    piv: S,
}

/// Working LP in computational form `A x = b`, `l <= x <= u`.
pub(crate) struct LpEngine<S> {
    rows: usize,
    n_orig: usize,
    art_start: usize,
    cols: Vec<Vec<(usize, S)>>,
    cost: Vec<S>,
    phase1_cost: Vec<S>,
    lower: Vec<Option<S>>,
    upper: Vec<Option<S>>,
    rhs: Vec<S>,
    objective_constant: S,

    head: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<S>,
    binv: Vec<S>,
    pivots_since_refactor: usize,
    refactor_interval: usize,

    tol: Tolerances<S>,
    rhs_scale: S,
    pub(crate) iterations: usize,
    pub(crate) iteration_cap: usize,
}

impl<S: Scalar> LpEngine<S> {
    pub(crate) fn new(inst: &MilpInstance<S>, opts: &SolverOptions) -> Self {
        let opts = opts.effective::<S>();
        let rows = inst.num_constraints();
        let n_orig = inst.num_vars();

        let mut cols: Vec<Vec<(usize, S)>> = vec![Vec::new(); n_orig];
        let mut lower: Vec<Option<S>> = inst.variables().iter().map(|v| v.lower.clone()).collect();
        let mut upper: Vec<Option<S>> = inst.variables().iter().map(|v| v.upper.clone()).collect();
        let mut cost: Vec<S> = inst.objective().to_vec();
        let rhs: Vec<S> = inst.constraints().iter().map(|c| c.rhs.clone()).collect();

        for (r, c) in inst.constraints().iter().enumerate() {
            for (id, a) in &c.terms {
                if a.is_zero() {
                    continue;
                }
                // merge duplicate terms for the same variable
                match cols[id.0].iter_mut().find(|(row, _)| *row == r) {
                    Some(entry) => entry.1 = entry.1.clone() + a.clone(),
                    None => cols[id.0].push((r, a.clone())),
                }
            }
        }

        for (r, c) in inst.constraints().iter().enumerate() {
            let sign = match c.sense {
                ConstraintSense::Le => S::one(),
                ConstraintSense::Ge => -S::one(),
                ConstraintSense::Eq => continue,
            };
            cols.push(vec![(r, sign)]);
            lower.push(Some(S::zero()));
            upper.push(None);
            cost.push(S::zero());
        }

        let art_start = cols.len();
        for r in 0..rows {
            // sign fixed when the start basis is built
            cols.push(vec![(r, S::one())]);
            lower.push(Some(S::zero()));
            upper.push(None);
            cost.push(S::zero());
        }
        let n = cols.len();
        let mut phase1_cost = vec![S::zero(); n];
        for c in phase1_cost.iter_mut().skip(art_start) {
            *c = S::one();
        }

        let rhs_scale = rhs
            .iter()
            .map(|b| b.abs())
            .fold(S::one(), S::max_of);

        let iteration_cap = opts.iteration_factor.saturating_mul(rows + n_orig).max(opts.iteration_factor);

        Self {
            rows,
            n_orig,
            art_start,
            cols,
            cost,
            phase1_cost,
            lower,
            upper,
            rhs,
            objective_constant: inst.objective_constant().clone(),
            head: Vec::new(),
            state: vec![VarState::AtLower; n],
            x: vec![S::zero(); n],
            binv: Vec::new(),
            pivots_since_refactor: 0,
            refactor_interval: opts.refactor_interval.max(1),
            tol: Tolerances {
                feas: S::from_config(opts.feasibility_tol),
                opt: S::from_config(opts.optimality_tol),
                piv: S::from_config(opts.pivot_tol),
            },
            rhs_scale,
            iterations: 0,
            iteration_cap,
        }
    }

    fn n(&self) -> usize {
        self.cols.len()
    }

    fn is_fixed(&self, j: usize) -> bool {
        matches!((&self.lower[j], &self.upper[j]), (Some(l), Some(u)) if l == u)
    }

    fn nonbasic_rest(&self, j: usize) -> (VarState, S) {
        match (&self.lower[j], &self.upper[j]) {
            (Some(l), _) => (VarState::AtLower, l.clone()),
            (None, Some(u)) => (VarState::AtUpper, u.clone()),
            (None, None) => (VarState::FreeZero, S::zero()),
        }
    }

    /// Two-phase solve from the all-artificial basis.
    pub(crate) fn solve_cold(&mut self) -> LpOutcome {
        let outcome = self.two_phase();
        // artificials must never outlive phase one, whatever its result
        for j in self.art_start..self.n() {
            self.upper[j] = Some(S::zero());
        }
        outcome
    }

    fn two_phase(&mut self) -> LpOutcome {
        let n = self.n();
        for j in 0..n {
            let (st, v) = self.nonbasic_rest(j);
            self.state[j] = st;
            self.x[j] = v;
        }
        for j in self.art_start..n {
            self.upper[j] = None;
        }
        let mut residual = self.rhs.clone();
        for j in 0..self.art_start {
            if self.x[j].is_zero() {
                continue;
            }
            for (r, a) in &self.cols[j] {
                residual[*r] = residual[*r].clone() - a.clone() * self.x[j].clone();
            }
        }
        self.head = (self.art_start..n).collect();
        self.binv = vec![S::zero(); self.rows * self.rows];
        for r in 0..self.rows {
            let j = self.art_start + r;
            let sign = if residual[r] < S::zero() { -S::one() } else { S::one() };
            self.cols[j] = vec![(r, sign.clone())];
            self.binv[r * self.rows + r] = sign.clone();
            self.state[j] = VarState::Basic;
            self.x[j] = residual[r].clone() * sign;
        }
        self.pivots_since_refactor = 0;

        let phase1 = std::mem::take(&mut self.phase1_cost);
        let outcome = self.primal(&phase1);
        self.phase1_cost = phase1;
        match outcome {
            LpOutcome::Optimal => {}
            LpOutcome::Unbounded => return LpOutcome::Singular,
            other => return other,
        }
        let infeasibility = (self.art_start..n).fold(S::zero(), |acc, j| acc + self.x[j].clone());
        if infeasibility > self.tol.feas.clone() * self.rhs_scale.clone() {
            return LpOutcome::Infeasible;
        }
        for j in self.art_start..n {
            self.upper[j] = Some(S::zero());
            if self.state[j] != VarState::Basic {
                self.state[j] = VarState::AtLower;
                self.x[j] = S::zero();
            }
        }
        let cost = self.cost.clone();
        self.primal(&cost)
    }

    /// Re-solves after bound changes, starting from the current basis.
    /// The basis stays dual feasible because bounds do not enter the reduced
    /// costs, so the dual simplex restores primal feasibility and a primal pass
    /// cleans up any tolerance-level dual infeasibility.
    pub(crate) fn solve_warm(&mut self, cutoff: Option<&S>) -> LpOutcome {
        if self.head.is_empty() && self.rows > 0 {
            return self.solve_cold();
        }
        if let Err(outcome) = self.refactor() {
            return outcome;
        }
        let cost = self.cost.clone();
        // the dual objective bounds the node only from a dual feasible start
        let cutoff = cutoff.filter(|_| self.is_dual_feasible(&cost));
        let (perturbed, shift) = self.perturbed_cost(&cost);
        let cutoff = cutoff.map(|c| c.clone() + shift);
        let mut outcome = self.dual(&perturbed, cutoff.as_ref());
        if outcome == LpOutcome::Optimal {
            outcome = self.primal(&cost);
        }
        outcome
    }

    /// Costs nudged so that ties among reduced costs disappear, keeping every
    /// nonbasic column on its dual feasible side. Also returns the largest
    /// amount the nudge can move the objective over the variable bounds.
    fn perturbed_cost(&self, cost: &[S]) -> (Vec<S>, S) {
        let mut out = cost.to_vec();
        let mut shift = S::zero();
        if self.tol.opt.is_zero() {
            return (out, shift);
        }
        let base = S::max_of(S::from_config(1e-7), self.tol.opt.clone() * S::from_config(100.0));
        for j in 0..self.n() {
            let (Some(l), Some(u)) = (&self.lower[j], &self.upper[j]) else {
                continue;
            };
            if l == u || self.state[j] == VarState::Basic {
                continue;
            }
            // deterministic spread in [0.5, 1.5)
            let spread = 0.5 + ((j as f64) * 0.618_033_988_749_895).fract();
            let delta = base.clone() * (S::one() + cost[j].abs()) * S::from_config(spread);
            let reach = S::max_of(l.abs(), u.abs());
            shift = shift + delta.clone() * reach;
            out[j] = if self.state[j] == VarState::AtUpper {
                out[j].clone() - delta
            } else {
                out[j].clone() + delta
            };
        }
        (out, shift)
    }

    fn objective_under(&self, cost: &[S]) -> S {
        (0..self.n()).fold(self.objective_constant.clone(), |acc, j| {
            if cost[j].is_zero() {
                acc
            } else {
                acc + cost[j].clone() * self.x[j].clone()
            }
        })
    }

    fn is_dual_feasible(&self, cost: &[S]) -> bool {
        let y = self.duals(cost);
        (0..self.n()).all(|j| {
            if self.state[j] == VarState::Basic || self.is_fixed(j) {
                return true;
            }
            let d = self.reduced_cost(j, cost, &y);
            match self.state[j] {
                VarState::AtLower => d >= -self.tol.opt.clone(),
                VarState::AtUpper => d <= self.tol.opt,
                _ => d.abs() <= self.tol.opt,
            }
        })
    }

    /// Replaces the bounds of an original variable. A nonbasic variable is
    /// moved onto its new bound; basic values are refreshed by the next solve.
    pub(crate) fn set_bounds(&mut self, j: usize, lower: Option<S>, upper: Option<S>) {
        self.lower[j] = lower;
        self.upper[j] = upper;
        if self.state[j] == VarState::Basic {
            return;
        }
        let keep_upper = self.state[j] == VarState::AtUpper && self.upper[j].is_some();
        if keep_upper {
            self.x[j] = self.upper[j].clone().unwrap();
        } else {
            let (st, v) = self.nonbasic_rest(j);
            self.state[j] = st;
            self.x[j] = v;
        }
    }

    pub(crate) fn bounds(&self, j: usize) -> (Option<S>, Option<S>) {
        (self.lower[j].clone(), self.upper[j].clone())
    }

    pub(crate) fn objective(&self) -> S {
        (0..self.n_orig).fold(self.objective_constant.clone(), |acc, j| {
            acc + self.cost[j].clone() * self.x[j].clone()
        })
    }

    pub(crate) fn solution(&self) -> Vec<S> {
        self.x[..self.n_orig].to_vec()
    }

    pub(crate) fn value(&self, j: usize) -> &S {
        &self.x[j]
    }

    fn duals(&self, cost: &[S]) -> Vec<S> {
        let m = self.rows;
        let mut y = vec![S::zero(); m];
        for (i, &h) in self.head.iter().enumerate() {
            let cb = &cost[h];
            if cb.is_zero() {
                continue;
            }
            let row = &self.binv[i * m..(i + 1) * m];
            for (yk, b) in y.iter_mut().zip(row) {
                if !b.is_zero() {
                    *yk = yk.clone() + cb.clone() * b.clone();
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, cost: &[S], y: &[S]) -> S {
        self.cols[j]
            .iter()
            .fold(cost[j].clone(), |acc, (r, a)| acc - y[*r].clone() * a.clone())
    }

    fn ftran(&self, j: usize) -> Vec<S> {
        let m = self.rows;
        let mut out = vec![S::zero(); m];
        for (r, a) in &self.cols[j] {
            for (i, o) in out.iter_mut().enumerate() {
                let b = &self.binv[i * m + r];
                if !b.is_zero() {
                    *o = o.clone() + b.clone() * a.clone();
                }
            }
        }
        out
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[S]) {
        let m = self.rows;
        let p = alpha[r].clone();
        for k in 0..m {
            let v = self.binv[r * m + k].clone();
            self.binv[r * m + k] = v / p.clone();
        }
        let pivot_row: Vec<S> = self.binv[r * m..(r + 1) * m].to_vec();
        for (i, a) in alpha.iter().enumerate() {
            if i == r || a.is_zero() {
                continue;
            }
            for (k, pr) in pivot_row.iter().enumerate() {
                if !pr.is_zero() {
                    let v = self.binv[i * m + k].clone();
                    self.binv[i * m + k] = v - a.clone() * pr.clone();
                }
            }
        }
        self.head[r] = q;
        self.state[q] = VarState::Basic;
        self.pivots_since_refactor += 1;
    }

    /// Rebuilds the basis inverse by Gauss-Jordan elimination and recomputes
    /// the basic values from the nonbasic ones.
    fn refactor(&mut self) -> Result<(), LpOutcome> {
        let m = self.rows;
        let width = 2 * m;
        let mut aug = vec![S::zero(); m * width];
        for (i, &h) in self.head.iter().enumerate() {
            for (r, a) in &self.cols[h] {
                aug[r * width + i] = a.clone();
            }
        }
        for i in 0..m {
            aug[i * width + m + i] = S::one();
        }
        for c in 0..m {
            let mut best = c;
            let mut best_abs = aug[c * width + c].abs();
            for r in c + 1..m {
                let v = aug[r * width + c].abs();
                if v > best_abs {
                    best = r;
                    best_abs = v;
                }
            }
            if best_abs.is_zero() || best_abs <= self.tol.piv.clone() * self.tol.piv.clone() {
                return Err(LpOutcome::Singular);
            }
            if best != c {
                for k in 0..width {
                    aug.swap(c * width + k, best * width + k);
                }
            }
            let p = aug[c * width + c].clone();
            for k in 0..width {
                let v = aug[c * width + k].clone();
                aug[c * width + k] = v / p.clone();
            }
            let prow: Vec<S> = aug[c * width..(c + 1) * width].to_vec();
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = aug[r * width + c].clone();
                if f.is_zero() {
                    continue;
                }
                for (k, pv) in prow.iter().enumerate() {
                    if !pv.is_zero() {
                        let v = aug[r * width + k].clone();
                        aug[r * width + k] = v - f.clone() * pv.clone();
                    }
                }
            }
        }
        // Row c of the reduced system holds the inverse row for basis column c.
        for i in 0..m {
            for k in 0..m {
                self.binv[i * m + k] = aug[i * width + m + k].clone();
            }
        }
        self.recompute_basic();
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn recompute_basic(&mut self) {
        let m = self.rows;
        let mut residual = self.rhs.clone();
        for j in 0..self.n() {
            if self.state[j] == VarState::Basic || self.x[j].is_zero() {
                continue;
            }
            for (r, a) in &self.cols[j] {
                residual[*r] = residual[*r].clone() - a.clone() * self.x[j].clone();
            }
        }
        for i in 0..m {
            let v = (0..m).fold(S::zero(), |acc, k| {
                let b = &self.binv[i * m + k];
                if b.is_zero() {
                    acc
                } else {
                    acc + b.clone() * residual[k].clone()
                }
            });
            let h = self.head[i];
            self.x[h] = v;
        }
    }

    fn primal(&mut self, cost: &[S]) -> LpOutcome {
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= self.iteration_cap {
                return LpOutcome::IterationLimit;
            }
            if self.pivots_since_refactor >= self.refactor_interval {
                if let Err(o) = self.refactor() {
                    return o;
                }
            }
            let y = self.duals(cost);

            let mut entering: Option<(usize, S, bool)> = None;
            for j in 0..self.n() {
                let st = self.state[j];
                if st == VarState::Basic || self.is_fixed(j) {
                    continue;
                }
                let d = self.reduced_cost(j, cost, &y);
                let increase = match st {
                    VarState::AtLower if d < -self.tol.opt.clone() => true,
                    VarState::AtUpper if d > self.tol.opt => false,
                    VarState::FreeZero if d < -self.tol.opt.clone() => true,
                    VarState::FreeZero if d > self.tol.opt => false,
                    _ => continue,
                };
                let score = d.abs();
                if bland {
                    entering = Some((j, score, increase));
                    break;
                }
                if entering.as_ref().is_none_or(|(_, s, _)| score > *s) {
                    entering = Some((j, score, increase));
                }
            }
            let Some((q, _, increase)) = entering else {
                return LpOutcome::Optimal;
            };
            self.iterations += 1;

            let alpha = self.ftran(q);
            let dir = if increase { S::one() } else { -S::one() };

            // (row, step) of the first basic variable to hit a bound
            let mut leave: Option<(usize, S)> = None;
            for (i, a) in alpha.iter().enumerate() {
                let rate = -(dir.clone() * a.clone());
                let h = self.head[i];
                let step = if rate < -self.tol.piv.clone() {
                    match &self.lower[h] {
                        Some(l) => S::max_of(self.x[h].clone() - l.clone(), S::zero()) / (-rate.clone()),
                        None => continue,
                    }
                } else if rate > self.tol.piv {
                    match &self.upper[h] {
                        Some(u) => S::max_of(u.clone() - self.x[h].clone(), S::zero()) / rate.clone(),
                        None => continue,
                    }
                } else {
                    continue;
                };
                let better = match &leave {
                    None => true,
                    Some((r, s)) => {
                        if step < *s {
                            true
                        } else if step == *s {
                            if bland {
                                h < self.head[*r]
                            } else {
                                a.abs() > alpha[*r].abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some((i, step));
                }
            }

            let span = match (&self.lower[q], &self.upper[q]) {
                (Some(l), Some(u)) => Some(u.clone() - l.clone()),
                _ => None,
            };
            let flip = match (&span, &leave) {
                (Some(sp), Some((_, s))) => sp <= s,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => return LpOutcome::Unbounded,
            };
            let step = if flip {
                span.clone().unwrap()
            } else {
                leave.as_ref().unwrap().1.clone()
            };

            if step > self.tol.feas.clone() * self.tol.feas.clone() {
                degenerate_run = 0;
                bland = false;
            } else {
                degenerate_run += 1;
                if degenerate_run > DEGENERATE_RUN_BEFORE_BLAND {
                    bland = true;
                }
            }

            if !step.is_zero() {
                let delta = dir.clone() * step.clone();
                self.x[q] = self.x[q].clone() + delta.clone();
                for (i, a) in alpha.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    let h = self.head[i];
                    self.x[h] = self.x[h].clone() - a.clone() * delta.clone();
                }
            }

            if flip {
                if increase {
                    self.state[q] = VarState::AtUpper;
                    self.x[q] = self.upper[q].clone().unwrap();
                } else {
                    self.state[q] = VarState::AtLower;
                    self.x[q] = self.lower[q].clone().unwrap();
                }
                continue;
            }

            let (r, _) = leave.unwrap();
            let p = self.head[r];
            let rate = -(dir * alpha[r].clone());
            if rate < S::zero() {
                self.state[p] = VarState::AtLower;
                self.x[p] = self.lower[p].clone().unwrap();
            } else {
                self.state[p] = VarState::AtUpper;
                self.x[p] = self.upper[p].clone().unwrap();
            }
            self.pivot(r, q, &alpha);
        }
    }

    fn dual(&mut self, cost: &[S], cutoff: Option<&S>) -> LpOutcome {
        let m = self.rows;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            if self.iterations >= self.iteration_cap {
                return LpOutcome::IterationLimit;
            }
            if self.pivots_since_refactor >= self.refactor_interval {
                if let Err(o) = self.refactor() {
                    return o;
                }
            }
            if let Some(c) = cutoff {
                if &self.objective_under(cost) > c {
                    return LpOutcome::Cutoff;
                }
            }

            // leaving row: largest bound violation, lowest row on ties;
            // under Bland, the violating row with the smallest basic index
            let mut leave: Option<(usize, S, bool)> = None;
            for i in 0..m {
                let h = self.head[i];
                let (viol, to_lower) = match (&self.lower[h], &self.upper[h]) {
                    (Some(l), _) if self.x[h] < l.clone() - self.tol.feas.clone() => {
                        (l.clone() - self.x[h].clone(), true)
                    }
                    (_, Some(u)) if self.x[h] > u.clone() + self.tol.feas.clone() => {
                        (self.x[h].clone() - u.clone(), false)
                    }
                    _ => continue,
                };
                let better = match &leave {
                    None => true,
                    Some((r, v, _)) if bland => h < self.head[*r] || (h == self.head[*r] && viol > *v),
                    Some((_, v, _)) => viol > *v,
                };
                if better {
                    leave = Some((i, viol, to_lower));
                }
            }
            let Some((r, _, to_lower)) = leave else {
                return LpOutcome::Optimal;
            };
            self.iterations += 1;

            let y = self.duals(cost);
            let rho: Vec<S> = self.binv[r * m..(r + 1) * m].to_vec();
            let mut entering: Option<(usize, S, S)> = None;
            for j in 0..self.n() {
                let st = self.state[j];
                if st == VarState::Basic || self.is_fixed(j) {
                    continue;
                }
                let arj = self.cols[j]
                    .iter()
                    .fold(S::zero(), |acc, (row, a)| acc + rho[*row].clone() * a.clone());
                // x_Br moves by -arj per unit increase of x_j
                let eligible = match (st, to_lower) {
                    (VarState::AtLower, true) => arj < -self.tol.piv.clone(),
                    (VarState::AtUpper, true) => arj > self.tol.piv,
                    (VarState::AtLower, false) => arj > self.tol.piv,
                    (VarState::AtUpper, false) => arj < -self.tol.piv.clone(),
                    (VarState::FreeZero, _) => arj.abs() > self.tol.piv,
                    (VarState::Basic, _) => false,
                };
                if !eligible {
                    continue;
                }
                let d = self.reduced_cost(j, cost, &y);
                let d_abs = match st {
                    VarState::AtLower => S::max_of(d, S::zero()),
                    VarState::AtUpper => S::max_of(-d, S::zero()),
                    _ => d.abs(),
                };
                let ratio = d_abs / arj.abs();
                let better = match &entering {
                    None => true,
                    Some((_, best, _)) if bland => ratio < *best,
                    Some((_, best, best_a)) => ratio < *best || (ratio == *best && arj.abs() > *best_a),
                };
                if better {
                    entering = Some((j, ratio, arj.abs()));
                }
            }
            let Some((q, step, _)) = entering else {
                return LpOutcome::Infeasible;
            };
            // dual steps below the optimality tolerance are noise in the reduced costs
            if step > self.tol.opt {
                degenerate_run = 0;
                bland = false;
            } else {
                degenerate_run += 1;
                if degenerate_run > DEGENERATE_RUN_BEFORE_BLAND {
                    bland = true;
                }
            }

            let alpha = self.ftran(q);
            if alpha[r].abs() <= self.tol.piv {
                return LpOutcome::Singular;
            }
            let p = self.head[r];
            let target = if to_lower {
                self.lower[p].clone().unwrap()
            } else {
                self.upper[p].clone().unwrap()
            };
            let theta = (self.x[p].clone() - target.clone()) / alpha[r].clone();
            self.x[q] = self.x[q].clone() + theta.clone();
            for (i, a) in alpha.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let h = self.head[i];
                self.x[h] = self.x[h].clone() - a.clone() * theta.clone();
            }
            self.x[p] = target;
            self.state[p] = if to_lower {
                VarState::AtLower
            } else {
                VarState::AtUpper
            };
            self.pivot(r, q, &alpha);
        }
    }
}

pub(crate) fn outcome_status(outcome: LpOutcome) -> SolveStatus {
    match outcome {
        LpOutcome::Optimal => SolveStatus::Optimal,
        LpOutcome::Infeasible | LpOutcome::Cutoff => SolveStatus::Infeasible,
        LpOutcome::Unbounded => SolveStatus::Unbounded,
        LpOutcome::IterationLimit | LpOutcome::Singular => SolveStatus::IterationLimit,
    }
}

/// Solves a purely continuous instance.
pub fn simplex_solve<S: Scalar>(
    lp: &MilpInstance<S>,
    opts: &SolverOptions,
) -> Result<SolveResult<S>, ModelError> {
    lp.validate()?;
    if lp.has_integrality() {
        return Err(ModelError::HasIntegrality);
    }
    Ok(solve_relaxation(lp, opts))
}

/// Solves the LP relaxation, ignoring integrality flags.
pub fn solve_relaxation<S: Scalar>(lp: &MilpInstance<S>, opts: &SolverOptions) -> SolveResult<S> {
    let mut engine = LpEngine::new(lp, opts);
    let outcome = engine.solve_cold();
    let status = outcome_status(outcome);
    if status != SolveStatus::Optimal {
        return SolveResult::without_point(status, engine.iterations);
    }
    let solution = engine.solution();
    SolveResult {
        status,
        objective: lp.evaluate_objective(&solution),
        solution,
        bound_gap: None,
        iterations: engine.iterations,
        nodes: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::model::ConstraintSense::{Eq, Ge, Le};
    use crate::optimizer::scalar::ratio;
    use num_rational::BigRational;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn single_variable_with_two_bounds_rows() {
        let mut lp = MilpInstance::<f64>::new("t");
        let x = lp.add_continuous("x");
        lp.set_objective(x, 1.0);
        lp.add_constraint("lo", vec![(x, 1.0)], Ge, 3.0);
        lp.add_constraint("hi", vec![(x, 1.0)], Le, 10.0);
        let res = simplex_solve(&lp, &opts()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut lp = MilpInstance::<f64>::new("t");
        let x = lp.add_continuous("x");
        lp.add_constraint("a", vec![(x, 1.0)], Le, 1.0);
        lp.add_constraint("b", vec![(x, 1.0)], Ge, 2.0);
        assert_eq!(simplex_solve(&lp, &opts()).unwrap().status, SolveStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction_is_reported() {
        let mut lp = MilpInstance::<f64>::new("t");
        let x = lp.add_continuous("x");
        let y = lp.add_continuous("y");
        lp.set_objective(x, -1.0);
        lp.add_constraint("a", vec![(x, 1.0), (y, -1.0)], Le, 1.0);
        assert_eq!(simplex_solve(&lp, &opts()).unwrap().status, SolveStatus::Unbounded);
    }

    #[test]
    fn free_and_negative_bounded_variables() {
        // min x + y, x free, y <= -1 (no lower), x + y >= -5, x >= -2 via row
        let mut lp = MilpInstance::<f64>::new("t");
        let x = lp.add_var("x", None, None, false);
        let y = lp.add_var("y", None, Some(-1.0), false);
        lp.set_objective(x, 1.0);
        lp.set_objective(y, 1.0);
        lp.add_constraint("sum", vec![(x, 1.0), (y, 1.0)], Ge, -5.0);
        lp.add_constraint("xlo", vec![(x, 1.0)], Ge, -2.0);
        let res = simplex_solve(&lp, &opts()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.objective + 5.0).abs() < 1e-9);
        assert!(lp.max_violation(&res.solution) < 1e-9);
    }

    #[test]
    fn equality_rows_with_negative_rhs() {
        let mut lp = MilpInstance::<f64>::new("t");
        let x = lp.add_continuous("x");
        let y = lp.add_continuous("y");
        lp.set_objective(x, 2.0);
        lp.set_objective(y, 3.0);
        lp.add_constraint("e", vec![(x, -1.0), (y, -1.0)], Eq, -4.0);
        lp.add_constraint("r", vec![(x, 1.0)], Le, 1.0);
        let res = simplex_solve(&lp, &opts()).unwrap();
        assert!((res.objective - 11.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut lp = MilpInstance::<f64>::new("t");
        let x = lp.add_continuous("x");
        let y = lp.add_continuous("y");
        lp.set_objective(x, 1.0);
        lp.set_objective(y, 2.0);
        lp.add_constraint("e1", vec![(x, 1.0), (y, 1.0)], Eq, 2.0);
        lp.add_constraint("e2", vec![(x, 2.0), (y, 2.0)], Eq, 4.0);
        let res = simplex_solve(&lp, &opts()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn integral_instances_are_rejected() {
        let mut lp = MilpInstance::<f64>::new("t");
        lp.add_binary("b");
        assert_eq!(simplex_solve(&lp, &opts()), Err(ModelError::HasIntegrality));
    }

    #[test]
    fn empty_instance_is_trivially_optimal() {
        let mut lp = MilpInstance::<f64>::new("t");
        lp.set_objective_constant(4.0);
        let res = simplex_solve(&lp, &opts()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.objective, 4.0);
    }

    #[test]
    fn exact_rational_solve_of_a_degenerate_lp() {
        // Beale's cycling example: min -3/4 x4 + 20 x5 - 1/2 x6 + 6 x7
        let mut lp = MilpInstance::<BigRational>::new("beale");
        let x: Vec<_> = (0..4).map(|i| lp.add_continuous(format!("x{i}"))).collect();
        lp.set_objective(x[0], ratio(-3, 4));
        lp.set_objective(x[1], ratio(20, 1));
        lp.set_objective(x[2], ratio(-1, 2));
        lp.set_objective(x[3], ratio(6, 1));
        lp.add_constraint(
            "r1",
            vec![(x[0], ratio(1, 4)), (x[1], ratio(-8, 1)), (x[2], ratio(-1, 1)), (x[3], ratio(9, 1))],
            Le,
            ratio(0, 1),
        );
        lp.add_constraint(
            "r2",
            vec![(x[0], ratio(1, 2)), (x[1], ratio(-12, 1)), (x[2], ratio(-1, 2)), (x[3], ratio(3, 1))],
            Le,
            ratio(0, 1),
        );
        lp.add_constraint("r3", vec![(x[2], ratio(1, 1))], Le, ratio(1, 1));
        let res = simplex_solve(&lp, &SolverOptions::exact()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.objective, ratio(-5, 4));
    }

    #[test]
    fn f32_solve_matches_f64() {
        fn build<S: Scalar>() -> MilpInstance<S> {
            let c = |v: f64| S::from_f64(v).unwrap();
            let mut lp = MilpInstance::<S>::new("t");
            let a = lp.add_continuous("a");
            let b = lp.add_continuous("b");
            lp.set_objective(a, c(1.0));
            lp.set_objective(b, c(2.0));
            lp.add_constraint("d", vec![(a, c(1.0)), (b, c(1.0))], Eq, c(8.0));
            lp.add_constraint("ca", vec![(a, c(1.0))], Le, c(5.0));
            lp.add_constraint("cb", vec![(b, c(1.0))], Le, c(5.0));
            lp
        }
        let r64 = simplex_solve(&build::<f64>(), &opts()).unwrap();
        let r32 = simplex_solve(&build::<f32>(), &opts()).unwrap();
        assert!((r64.objective - 11.0).abs() < 1e-12);
        assert!((r32.objective - 11.0).abs() < 1e-4);
    }
}
