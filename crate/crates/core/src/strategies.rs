//! The five assignment strategies and the power evaluation of their outcome.
//!
//! Placing fraction `x` of task `i` on node `j` costs
//! `x * (w_i * proc_intensity_j + d_i * path_intensity_j)`: traffic follows
//! processing proportionally. The optimizing strategies compile that cost into
//! a MILP; the shared-device power is left out of the objective because no
//! placement can change it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::{path_intensity, shared_overhead, Architecture, ArchitectureError, ProcessingNode, Tier};
use crate::optimizer::{
    branch_and_bound_with_incumbent, sanitize_name, simplex_solve, ConstraintSense, MilpInstance, ModelError,
    SolveStatus, SolverOptions, VarId,
};
use crate::workload::Task;

/// Slack allowed when checking an assignment against its constraints.
pub const ASSIGNMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Cloud,
    CfOptimal,
    CfvSingle,
    CfvDistributed,
    CfvRandom,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Cloud,
        Strategy::CfOptimal,
        Strategy::CfvSingle,
        Strategy::CfvDistributed,
        Strategy::CfvRandom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Cloud => "cloud",
            Strategy::CfOptimal => "cf_optimal",
            Strategy::CfvSingle => "cfv_single",
            Strategy::CfvDistributed => "cfv_distributed",
            Strategy::CfvRandom => "cfv_random",
        }
    }

    /// The MILP this strategy solves, if it is an optimizing one.
    pub fn milp_mode(self) -> Option<MilpMode> {
        match self {
            Strategy::CfOptimal => Some(MilpMode::CfOptimal),
            Strategy::CfvSingle => Some(MilpMode::CfvSingle),
            Strategy::CfvDistributed => Some(MilpMode::CfvDistributed),
            Strategy::Cloud | Strategy::CfvRandom => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = StrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| StrategyError::UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MilpMode {
    /// Cloud and fog nodes only, fractional splitting allowed.
    CfOptimal,
    /// All nodes, each task on exactly one node.
    CfvSingle,
    /// All nodes, fractional splitting allowed.
    CfvDistributed,
}

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error(transparent)]
    Architecture(#[from] ArchitectureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{strategy}: solver stopped with status {status}")]
    Solver { strategy: Strategy, status: SolveStatus },
    #[error("baseline power must be positive, got {0}")]
    NonPositiveBaseline(f64),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
}

#[derive(Debug, Error, PartialEq)]
pub enum EvaluationError {
    #[error("assignment has {rows} rows x {cols} columns, expected {tasks} x {nodes}")]
    Shape {
        rows: usize,
        cols: usize,
        tasks: usize,
        nodes: usize,
    },
    #[error("task {task}: fractions sum to {sum}, expected 1")]
    RowSum { task: usize, sum: f64 },
    #[error("task {task} on node `{node}`: fraction {value} outside [0, 1]")]
    Fraction { task: usize, node: String, value: f64 },
    #[error("node `{node}`: processing load {load} GHz exceeds capacity {capacity} GHz")]
    ProcessingCapacity { node: String, load: f64, capacity: f64 },
    #[error("node `{node}`: traffic {load} Mb/s exceeds link capacity {capacity} Mb/s")]
    LinkCapacity { node: String, load: f64, capacity: f64 },
    #[error("vehicular tier: traffic {load} Mb/s exceeds access capacity {capacity} Mb/s")]
    AccessCapacity { load: f64, capacity: f64 },
}

/// Watts charged for running `task` entirely on `node`.
pub fn task_node_cost(task: &Task, node: &ProcessingNode) -> f64 {
    task.proc_demand * node.proc_intensity + task.traffic_demand * path_intensity(node)
}

/// A compiled assignment MILP and the `(task, node)` behind each variable.
#[derive(Debug, Clone)]
pub struct AssignmentModel {
    pub instance: MilpInstance<f64>,
    pub vars: Vec<(usize, usize)>,
    pub mode: MilpMode,
}

pub fn build_assignment_milp(arch: &Architecture, tasks: &[Task], mode: MilpMode) -> AssignmentModel {
    let allowed: Vec<usize> = arch
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| mode != MilpMode::CfOptimal || n.tier != Tier::Vc)
        .map(|(j, _)| j)
        .collect();
    let binary = mode == MilpMode::CfvSingle;
    let name = match mode {
        MilpMode::CfOptimal => "cf_optimal",
        MilpMode::CfvSingle => "cfv_single",
        MilpMode::CfvDistributed => "cfv_distributed",
    };

    let mut inst = MilpInstance::new(name);
    let mut vars = Vec::with_capacity(tasks.len() * allowed.len());
    // var_of[i][k] for allowed node k
    let mut var_of: Vec<Vec<VarId>> = Vec::with_capacity(tasks.len());
    for (i, task) in tasks.iter().enumerate() {
        let mut row = Vec::with_capacity(allowed.len());
        for &j in &allowed {
            let node = &arch.nodes[j];
            let vname = sanitize_name(&format!("x_t{}_{}", task.id, node.id));
            let v = if binary {
                inst.add_binary(vname)
            } else {
                inst.add_continuous(vname)
            };
            inst.set_objective(v, task_node_cost(task, node));
            vars.push((i, j));
            row.push(v);
        }
        var_of.push(row);
    }

    for (i, task) in tasks.iter().enumerate() {
        let terms = var_of[i].iter().map(|v| (*v, 1.0)).collect();
        inst.add_constraint(format!("assign_t{}", task.id), terms, ConstraintSense::Eq, 1.0);
    }
    for (k, &j) in allowed.iter().enumerate() {
        let node = &arch.nodes[j];
        if let Some(cap) = node.proc_capacity {
            let terms = tasks
                .iter()
                .enumerate()
                .map(|(i, t)| (var_of[i][k], t.proc_demand))
                .collect();
            inst.add_constraint(format!("cap_{}", node.id), terms, ConstraintSense::Le, cap);
        }
    }
    for (k, &j) in allowed.iter().enumerate() {
        let node = &arch.nodes[j];
        if let Some(cap) = node.link_capacity {
            let terms = tasks
                .iter()
                .enumerate()
                .map(|(i, t)| (var_of[i][k], t.traffic_demand))
                .collect();
            inst.add_constraint(format!("link_{}", node.id), terms, ConstraintSense::Le, cap);
        }
    }
    if let Some(cap) = arch.vc_access_capacity {
        let terms: Vec<(VarId, f64)> = allowed
            .iter()
            .enumerate()
            .filter(|(_, &j)| arch.nodes[j].tier == Tier::Vc)
            .flat_map(|(k, _)| {
                tasks
                    .iter()
                    .enumerate()
                    .map(move |(i, t)| (i, k, t.traffic_demand))
            })
            .map(|(i, k, d)| (var_of[i][k], d))
            .collect();
        if !terms.is_empty() {
            inst.add_constraint("access_vc", terms, ConstraintSense::Le, cap);
        }
    }

    AssignmentModel {
        instance: inst,
        vars,
        mode,
    }
}

impl AssignmentModel {
    /// Expands a solution vector into a dense tasks x nodes matrix.
    pub fn to_matrix(&self, n_tasks: usize, n_nodes: usize, solution: &[f64]) -> Vec<Vec<f64>> {
        let mut x = vec![vec![0.0; n_nodes]; n_tasks];
        for (&(i, j), v) in self.vars.iter().zip(solution) {
            x[i][j] = *v;
        }
        x
    }

    /// Flattens a dense matrix into this model's variable order.
    pub fn from_matrix(&self, x: &[Vec<f64>]) -> Vec<f64> {
        self.vars.iter().map(|&(i, j)| x[i][j]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSummary {
    pub status: SolveStatus,
    /// MILP objective in watts, excluding shared-device power.
    pub objective: f64,
    pub bound_gap: Option<f64>,
    pub iterations: usize,
    pub nodes: usize,
}

/// Per-(task, node) processing fractions produced by one strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignmentMatrix {
    pub strategy: Strategy,
    pub x: Vec<Vec<f64>>,
    pub feasible: bool,
    pub solver: Option<SolverSummary>,
}

pub fn assign(
    arch: &Architecture,
    tasks: &[Task],
    strategy: Strategy,
    seed: u64,
    opts: &SolverOptions,
) -> Result<AssignmentMatrix, StrategyError> {
    let n_nodes = arch.nodes.len();
    let matrix = match strategy {
        Strategy::Cloud => {
            let c = arch.cloud_index()?;
            let x = tasks
                .iter()
                .map(|_| {
                    let mut row = vec![0.0; n_nodes];
                    row[c] = 1.0;
                    row
                })
                .collect();
            AssignmentMatrix {
                strategy,
                x,
                feasible: true,
                solver: None,
            }
        }
        Strategy::CfvRandom => assign_random(arch, tasks, seed)?,
        Strategy::CfOptimal | Strategy::CfvSingle | Strategy::CfvDistributed => {
            let mode = strategy.milp_mode().expect("optimizing strategy");
            let model = build_assignment_milp(arch, tasks, mode);
            let result = if mode == MilpMode::CfvSingle && !tasks.is_empty() {
                let start = greedy_single(arch, tasks).map(|x| model.from_matrix(&x));
                branch_and_bound_with_incumbent(&model.instance, opts, start.as_deref())?
            } else {
                simplex_solve(&model.instance, opts)?
            };
            // a node-limited search still carries a feasible incumbent and its gap
            let usable = result.status == SolveStatus::Optimal
                || (result.status == SolveStatus::IterationLimit && result.solution.len() == model.vars.len());
            if !usable {
                return Err(StrategyError::Solver {
                    strategy,
                    status: result.status,
                });
            }
            AssignmentMatrix {
                strategy,
                x: model.to_matrix(tasks.len(), n_nodes, &result.solution),
                feasible: true,
                solver: Some(SolverSummary {
                    status: result.status,
                    objective: result.objective,
                    bound_gap: result.bound_gap,
                    iterations: result.iterations,
                    nodes: result.nodes,
                }),
            }
        }
    };
    let feasible = check_assignment(arch, tasks, &matrix.x).is_ok();
    Ok(AssignmentMatrix { feasible, ..matrix })
}

/// Remaining room on each node while placing whole tasks.
struct Residual {
    proc: Vec<Option<f64>>,
    link: Vec<Option<f64>>,
    access: Option<f64>,
}

impl Residual {
    fn new(arch: &Architecture) -> Self {
        Self {
            proc: arch.nodes.iter().map(|n| n.proc_capacity).collect(),
            link: arch.nodes.iter().map(|n| n.link_capacity).collect(),
            access: arch.vc_access_capacity,
        }
    }

    fn fits(&self, arch: &Architecture, j: usize, task: &Task) -> bool {
        let room = |r: Option<f64>, need: f64| r.is_none_or(|r| need <= r + 1e-12);
        room(self.proc[j], task.proc_demand)
            && room(self.link[j], task.traffic_demand)
            && (arch.nodes[j].tier != Tier::Vc || room(self.access, task.traffic_demand))
    }

    fn take(&mut self, arch: &Architecture, j: usize, task: &Task) {
        self.shift(arch, j, task, -1.0);
    }

    fn give(&mut self, arch: &Architecture, j: usize, task: &Task) {
        self.shift(arch, j, task, 1.0);
    }

    fn shift(&mut self, arch: &Architecture, j: usize, task: &Task, sign: f64) {
        if let Some(r) = self.proc[j].as_mut() {
            *r += sign * task.proc_demand;
        }
        if let Some(r) = self.link[j].as_mut() {
            *r += sign * task.traffic_demand;
        }
        if arch.nodes[j].tier == Tier::Vc {
            if let Some(r) = self.access.as_mut() {
                *r += sign * task.traffic_demand;
            }
        }
    }
}

/// Whole-task heuristic: tasks in order of largest saving over the cloud, each
/// on its cheapest node with room, then improved by local search. Used as the
/// starting incumbent for the single-assignment search.
pub fn greedy_single(arch: &Architecture, tasks: &[Task]) -> Option<Vec<Vec<f64>>> {
    let cloud = arch.cloud_index().ok()?;
    let mut order: Vec<usize> = (0..tasks.len()).collect();
    let best_saving = |t: &Task| {
        let base = task_node_cost(t, &arch.nodes[cloud]);
        arch.nodes
            .iter()
            .map(|n| base - task_node_cost(t, n))
            .fold(0.0, f64::max)
    };
    order.sort_by(|&a, &b| best_saving(&tasks[b]).total_cmp(&best_saving(&tasks[a])).then(a.cmp(&b)));

    let mut residual = Residual::new(arch);
    let mut place = vec![cloud; tasks.len()];
    for i in order {
        let task = &tasks[i];
        let j = (0..arch.nodes.len())
            .filter(|&j| residual.fits(arch, j, task))
            .min_by(|&a, &b| {
                task_node_cost(task, &arch.nodes[a])
                    .total_cmp(&task_node_cost(task, &arch.nodes[b]))
                    .then(a.cmp(&b))
            })?;
        residual.take(arch, j, task);
        place[i] = j;
    }
    improve_placement(arch, tasks, &mut place, &mut residual);

    let mut x = vec![vec![0.0; arch.nodes.len()]; tasks.len()];
    for (i, &j) in place.iter().enumerate() {
        x[i][j] = 1.0;
    }
    Some(x)
}

/// First-improvement local search over whole-task placements: relocate one
/// task, swap two tasks, or relocate one task after evicting another from the
/// target node.
fn improve_placement(arch: &Architecture, tasks: &[Task], place: &mut [usize], residual: &mut Residual) {
    const EPS: f64 = 1e-9;
    const MAX_ROUNDS: usize = 1000;
    let n = arch.nodes.len();
    let cost = |i: usize, j: usize| task_node_cost(&tasks[i], &arch.nodes[j]);

    for _ in 0..MAX_ROUNDS {
        let mut improved = false;

        for i in 0..tasks.len() {
            let p = place[i];
            residual.give(arch, p, &tasks[i]);
            let best = (0..n)
                .filter(|&j| j != p && cost(i, j) < cost(i, p) - EPS && residual.fits(arch, j, &tasks[i]))
                .min_by(|&a, &b| cost(i, a).total_cmp(&cost(i, b)).then(a.cmp(&b)));
            let to = best.unwrap_or(p);
            residual.take(arch, to, &tasks[i]);
            place[i] = to;
            improved |= to != p;
        }
        if improved {
            continue;
        }

        'swap: for a in 0..tasks.len() {
            for b in a + 1..tasks.len() {
                let (pa, pb) = (place[a], place[b]);
                if pa == pb || cost(a, pb) + cost(b, pa) >= cost(a, pa) + cost(b, pb) - EPS {
                    continue;
                }
                residual.give(arch, pa, &tasks[a]);
                residual.give(arch, pb, &tasks[b]);
                if residual.fits(arch, pb, &tasks[a]) {
                    residual.take(arch, pb, &tasks[a]);
                    if residual.fits(arch, pa, &tasks[b]) {
                        residual.take(arch, pa, &tasks[b]);
                        place.swap(a, b);
                        improved = true;
                        break 'swap;
                    }
                    residual.give(arch, pb, &tasks[a]);
                }
                residual.take(arch, pa, &tasks[a]);
                residual.take(arch, pb, &tasks[b]);
            }
        }
        if improved {
            continue;
        }

        'eject: for i in 0..tasks.len() {
            let p = place[i];
            for j in 0..n {
                if j == p || cost(i, j) >= cost(i, p) - EPS {
                    continue;
                }
                for b in 0..tasks.len() {
                    if place[b] != j || b == i {
                        continue;
                    }
                    residual.give(arch, p, &tasks[i]);
                    residual.give(arch, j, &tasks[b]);
                    if residual.fits(arch, j, &tasks[i]) {
                        residual.take(arch, j, &tasks[i]);
                        let gain = cost(i, p) - cost(i, j);
                        let target = (0..n)
                            .filter(|&k| k != j && cost(b, k) - cost(b, j) < gain - EPS && residual.fits(arch, k, &tasks[b]))
                            .min_by(|&x, &y| cost(b, x).total_cmp(&cost(b, y)).then(x.cmp(&y)));
                        if let Some(k) = target {
                            residual.take(arch, k, &tasks[b]);
                            place[i] = j;
                            place[b] = k;
                            improved = true;
                            break 'eject;
                        }
                        residual.give(arch, j, &tasks[i]);
                    }
                    residual.take(arch, p, &tasks[i]);
                    residual.take(arch, j, &tasks[b]);
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Random tier per task (uniform over cloud, fog, vc), first node in that
/// tier with room; a full vehicular tier spills to fog and a full fog tier
/// spills to the cloud.
pub fn assign_random(arch: &Architecture, tasks: &[Task], seed: u64) -> Result<AssignmentMatrix, StrategyError> {
    let cloud = arch.cloud_index()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residual = Residual::new(arch);
    let mut x = vec![vec![0.0; arch.nodes.len()]; tasks.len()];
    for (i, task) in tasks.iter().enumerate() {
        let drawn = Tier::ALL[rng.random_range(0..3)];
        let cascade: &[Tier] = match drawn {
            Tier::Vc => &[Tier::Vc, Tier::Fog],
            Tier::Fog => &[Tier::Fog],
            Tier::Cloud => &[],
        };
        let j = cascade
            .iter()
            .find_map(|&tier| arch.nodes_in(tier).map(|(j, _)| j).find(|&j| residual.fits(arch, j, task)))
            .unwrap_or(cloud);
        residual.take(arch, j, task);
        x[i][j] = 1.0;
    }
    Ok(AssignmentMatrix {
        strategy: Strategy::CfvRandom,
        x,
        feasible: true,
        solver: None,
    })
}

/// Checks every assignment invariant, naming the first violated row.
pub fn check_assignment(arch: &Architecture, tasks: &[Task], x: &[Vec<f64>]) -> Result<(), EvaluationError> {
    let n = arch.nodes.len();
    if x.len() != tasks.len() || x.iter().any(|r| r.len() != n) {
        return Err(EvaluationError::Shape {
            rows: x.len(),
            cols: x.first().map_or(n, Vec::len),
            tasks: tasks.len(),
            nodes: n,
        });
    }
    for (i, row) in x.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !(-ASSIGNMENT_TOL..=1.0 + ASSIGNMENT_TOL).contains(&v) {
                return Err(EvaluationError::Fraction {
                    task: tasks[i].id,
                    node: arch.nodes[j].id.clone(),
                    value: v,
                });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ASSIGNMENT_TOL {
            return Err(EvaluationError::RowSum { task: tasks[i].id, sum });
        }
    }
    let mut access = 0.0;
    for (j, node) in arch.nodes.iter().enumerate() {
        let load: f64 = tasks.iter().zip(x).map(|(t, r)| t.proc_demand * r[j]).sum();
        let traffic: f64 = tasks.iter().zip(x).map(|(t, r)| t.traffic_demand * r[j]).sum();
        if let Some(cap) = node.proc_capacity {
            if load > cap + ASSIGNMENT_TOL {
                return Err(EvaluationError::ProcessingCapacity {
                    node: node.id.clone(),
                    load,
                    capacity: cap,
                });
            }
        }
        if let Some(cap) = node.link_capacity {
            if traffic > cap + ASSIGNMENT_TOL {
                return Err(EvaluationError::LinkCapacity {
                    node: node.id.clone(),
                    load: traffic,
                    capacity: cap,
                });
            }
        }
        if node.tier == Tier::Vc {
            access += traffic;
        }
    }
    if let Some(cap) = arch.vc_access_capacity {
        if access > cap + ASSIGNMENT_TOL {
            return Err(EvaluationError::AccessCapacity { load: access, capacity: cap });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TierValues {
    pub cloud: f64,
    pub fog: f64,
    pub vc: f64,
}

impl TierValues {
    pub fn get(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Cloud => self.cloud,
            Tier::Fog => self.fog,
            Tier::Vc => self.vc,
        }
    }

    fn add(&mut self, tier: Tier, v: f64) {
        match tier {
            Tier::Cloud => self.cloud += v,
            Tier::Fog => self.fog += v,
            Tier::Vc => self.vc += v,
        }
    }

    pub fn sum(&self) -> f64 {
        self.cloud + self.fog + self.vc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerBreakdown {
    pub proc_watts: TierValues,
    pub net_watts: BTreeMap<String, f64>,
    pub shared_watts: f64,
    pub total_watts: f64,
}

impl PowerBreakdown {
    pub fn net_total(&self) -> f64 {
        self.net_watts.values().sum()
    }
}

pub fn evaluate_power(
    arch: &Architecture,
    tasks: &[Task],
    assignment: &AssignmentMatrix,
) -> Result<PowerBreakdown, EvaluationError> {
    check_assignment(arch, tasks, &assignment.x)?;
    let mut proc_watts = TierValues::default();
    let mut net_watts: BTreeMap<String, f64> = BTreeMap::new();
    for (j, node) in arch.nodes.iter().enumerate() {
        let load: f64 = tasks.iter().zip(&assignment.x).map(|(t, r)| t.proc_demand * r[j]).sum();
        let traffic: f64 = tasks
            .iter()
            .zip(&assignment.x)
            .map(|(t, r)| t.traffic_demand * r[j])
            .sum();
        proc_watts.add(node.tier, node.proc_intensity * load);
        for hop in &node.path.hops {
            *net_watts.entry(hop.device.clone()).or_insert(0.0) += f64::from(hop.multiplicity) * hop.intensity * traffic;
        }
    }
    let shared_watts = shared_overhead(arch, tasks);
    let total_watts = proc_watts.sum() + net_watts.values().sum::<f64>() + shared_watts;
    Ok(PowerBreakdown {
        proc_watts,
        net_watts,
        shared_watts,
        total_watts,
    })
}

/// GHz placed on each tier.
pub fn processing_by_tier(arch: &Architecture, tasks: &[Task], x: &[Vec<f64>]) -> TierValues {
    let mut out = TierValues::default();
    for (t, row) in tasks.iter().zip(x) {
        for (node, v) in arch.nodes.iter().zip(row) {
            out.add(node.tier, t.proc_demand * v);
        }
    }
    out
}

/// Percentage saved by `candidate` against `baseline`; negative is a loss.
pub fn power_savings(baseline_watts: f64, candidate_watts: f64) -> Result<f64, StrategyError> {
    if !(baseline_watts > 0.0) {
        return Err(StrategyError::NonPositiveBaseline(baseline_watts));
    }
    Ok(100.0 * (1.0 - candidate_watts / baseline_watts))
}
