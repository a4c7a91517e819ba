//! Demand sweeps, savings aggregation and flat-file output.
//!
//! Each job is one (sweep point, replication): it samples one task set and
//! runs every requested strategy on it. Jobs may run on a thread pool; rows
//! are returned in the order (sweep, point, replication, strategy name).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::architecture::Architecture;
use crate::config::{ConfigError, ScenarioConfig};
use crate::optimizer::{SolveStatus, SolverOptions};
use crate::strategies::{assign, evaluate_power, power_savings, processing_by_tier, Strategy, StrategyError};
use crate::workload::{replication_seed, sample_tasks, sweep_specs, SweepKind, Task, WorkloadError};

pub const RESULTS_FILE: &str = "results.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const SAVINGS_FILE: &str = "savings.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const PLOT_DIR: &str = "plotdata";
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha), seeded with seed_from_u64";

/// Salt separating the random strategy's stream from the task sampler's.
const RANDOM_STRATEGY_SALT: u64 = 0x005e_ed0f_7a5c;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{sweep} point {point} replication {replication}: no usable {baseline} row")]
    MissingBaseline {
        sweep: SweepKind,
        point: usize,
        replication: usize,
        baseline: Strategy,
    },
    #[error(transparent)]
    Savings(#[from] StrategyError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Outcome label of one row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RowStatus {
    Optimal,
    /// Node or iteration budget hit; the row holds the best feasible point found.
    IterationLimit,
    /// Procedural strategy (cloud, cfv_random); no solver involved.
    Direct,
    Failed,
}

impl From<SolveStatus> for RowStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => RowStatus::Optimal,
            SolveStatus::IterationLimit => RowStatus::IterationLimit,
            SolveStatus::Infeasible | SolveStatus::Unbounded => RowStatus::Failed,
        }
    }
}

/// One strategy on one task set. Power fields are empty on failed rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep: SweepKind,
    pub point: usize,
    pub demand_mean: f64,
    pub replication: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub total_w: Option<f64>,
    pub proc_cloud_w: Option<f64>,
    pub proc_fog_w: Option<f64>,
    pub proc_vc_w: Option<f64>,
    pub net_w: Option<f64>,
    pub shared_w: Option<f64>,
    pub ghz_cloud: Option<f64>,
    pub ghz_fog: Option<f64>,
    pub ghz_vc: Option<f64>,
    /// Solver objective, which excludes the shared-device constant.
    pub milp_objective_w: Option<f64>,
    pub bound_gap_w: Option<f64>,
    pub status: RowStatus,
}

/// Wall-clock cost of one row, kept apart so results stay reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub sweep: SweepKind,
    pub point: usize,
    pub replication: usize,
    pub strategy: Strategy,
    pub solve_ms: f64,
    pub iterations: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub timings: Vec<TimingRow>,
    /// Messages of failed rows, in row order.
    pub failures: Vec<String>,
}

impl SweepResult {
    pub fn extend(&mut self, other: SweepResult) {
        self.rows.extend(other.rows);
        self.timings.extend(other.timings);
        self.failures.extend(other.failures);
    }
}

/// Requested strategies, deduplicated and sorted by name.
pub fn row_order(strategies: &[Strategy]) -> Vec<Strategy> {
    let mut s = strategies.to_vec();
    s.sort_by_key(|s| s.as_str());
    s.dedup();
    s
}

/// Seed given to the random strategy for a task set sampled with `seed`.
pub fn random_strategy_seed(seed: u64) -> u64 {
    seed ^ RANDOM_STRATEGY_SALT
}

struct Job {
    point: usize,
    replication: usize,
    demand_mean: f64,
    seed: u64,
    tasks: Vec<Task>,
}

fn run_strategy(
    arch: &Architecture,
    job: &Job,
    kind: SweepKind,
    strategy: Strategy,
    opts: &SolverOptions,
) -> (SweepRow, TimingRow, Option<String>) {
    let start = Instant::now();
    let outcome = assign(arch, &job.tasks, strategy, random_strategy_seed(job.seed), opts).and_then(|m| {
        let power = evaluate_power(arch, &job.tasks, &m).map_err(StrategyError::from)?;
        Ok((m, power))
    });
    let solve_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut row = SweepRow {
        sweep: kind,
        point: job.point,
        demand_mean: job.demand_mean,
        replication: job.replication,
        seed: job.seed,
        strategy,
        total_w: None,
        proc_cloud_w: None,
        proc_fog_w: None,
        proc_vc_w: None,
        net_w: None,
        shared_w: None,
        ghz_cloud: None,
        ghz_fog: None,
        ghz_vc: None,
        milp_objective_w: None,
        bound_gap_w: None,
        status: RowStatus::Failed,
    };
    let mut timing = TimingRow {
        sweep: kind,
        point: job.point,
        replication: job.replication,
        strategy,
        solve_ms,
        iterations: 0,
        nodes: 0,
    };
    let failure = match outcome {
        Ok((m, power)) => {
            let ghz = processing_by_tier(arch, &job.tasks, &m.x);
            row.total_w = Some(power.total_watts);
            row.proc_cloud_w = Some(power.proc_watts.cloud);
            row.proc_fog_w = Some(power.proc_watts.fog);
            row.proc_vc_w = Some(power.proc_watts.vc);
            row.net_w = Some(power.net_total());
            row.shared_w = Some(power.shared_watts);
            row.ghz_cloud = Some(ghz.cloud);
            row.ghz_fog = Some(ghz.fog);
            row.ghz_vc = Some(ghz.vc);
            row.status = match &m.solver {
                Some(s) => {
                    row.milp_objective_w = Some(s.objective);
                    row.bound_gap_w = s.bound_gap;
                    timing.iterations = s.iterations;
                    timing.nodes = s.nodes;
                    s.status.into()
                }
                None => RowStatus::Direct,
            };
            None
        }
        Err(e) => Some(format!(
            "{kind} point {} replication {} {strategy}: {e}",
            job.point, job.replication
        )),
    };
    (row, timing, failure)
}

/// Runs one sweep of `cfg` (base workload, architecture, strategies,
/// replications and master seed all taken from the config).
pub fn run_sweep(cfg: &ScenarioConfig, kind: SweepKind) -> Result<SweepResult, HarnessError> {
    let arch = cfg.build()?;
    let base = cfg.workload.reseeded(cfg.harness.seed);
    let strategies = row_order(&cfg.harness.strategies);
    let mut jobs = Vec::new();
    for (point, spec) in sweep_specs(kind, &base).into_iter().enumerate() {
        for replication in 0..cfg.harness.replications {
            let spec = spec.reseeded(replication_seed(spec.seed, replication));
            jobs.push(Job {
                point,
                replication,
                demand_mean: kind.mean_of(&spec),
                seed: spec.seed,
                tasks: sample_tasks(&spec)?,
            });
        }
    }

    let work = |job: &Job| -> Vec<(SweepRow, TimingRow, Option<String>)> {
        strategies
            .iter()
            .map(|&s| run_strategy(&arch, job, kind, s, &cfg.solver_for(s)))
            .collect()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.harness.threads)
        .build()
        .expect("thread pool");
    let per_job: Vec<_> = pool.install(|| jobs.par_iter().map(work).collect());

    let mut out = SweepResult::default();
    for (row, timing, failure) in per_job.into_iter().flatten() {
        out.rows.push(row);
        out.timings.push(timing);
        out.failures.extend(failure);
    }
    Ok(out)
}

/// Every sweep listed in the config, in listed order.
pub fn run_all(cfg: &ScenarioConfig) -> Result<SweepResult, HarnessError> {
    let mut out = SweepResult::default();
    for &kind in &cfg.harness.sweeps {
        out.extend(run_sweep(cfg, kind)?);
    }
    Ok(out)
}

/// Mean savings of one strategy over one sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavingsRow {
    pub sweep: SweepKind,
    pub strategy: Strategy,
    /// (point, replication) pairs averaged.
    pub samples: usize,
    /// Rows of this strategy left out because they failed.
    pub failed: usize,
    pub vs_cloud_pct: f64,
    pub vs_cf_optimal_pct: f64,
}

/// Pointwise savings against the cloud and cf_optimal rows of the same task
/// set, averaged per (sweep, strategy).
pub fn savings_table(rows: &[SweepRow]) -> Result<Vec<SavingsRow>, HarnessError> {
    type Key = (SweepKind, usize, usize);
    let mut baselines: BTreeMap<(Key, Strategy), f64> = BTreeMap::new();
    for r in rows {
        if matches!(r.strategy, Strategy::Cloud | Strategy::CfOptimal) {
            if let Some(t) = r.total_w {
                baselines.insert(((r.sweep, r.point, r.replication), r.strategy), t);
            }
        }
    }
    let baseline = |key: Key, which: Strategy| {
        baselines.get(&(key, which)).copied().ok_or(HarnessError::MissingBaseline {
            sweep: key.0,
            point: key.1,
            replication: key.2,
            baseline: which,
        })
    };

    struct Acc {
        samples: usize,
        failed: usize,
        vs_cloud: f64,
        vs_cf: f64,
    }
    let mut acc: BTreeMap<(SweepKind, &'static str), (Strategy, Acc)> = BTreeMap::new();
    for r in rows {
        let key = (r.sweep, r.point, r.replication);
        let cloud = baseline(key, Strategy::Cloud)?;
        let cf = baseline(key, Strategy::CfOptimal)?;
        let entry = &mut acc
            .entry((r.sweep, r.strategy.as_str()))
            .or_insert_with(|| {
                (
                    r.strategy,
                    Acc {
                        samples: 0,
                        failed: 0,
                        vs_cloud: 0.0,
                        vs_cf: 0.0,
                    },
                )
            })
            .1;
        match r.total_w {
            Some(t) => {
                entry.samples += 1;
                entry.vs_cloud += power_savings(cloud, t)?;
                entry.vs_cf += power_savings(cf, t)?;
            }
            None => entry.failed += 1,
        }
    }
    Ok(acc
        .into_iter()
        .map(|((sweep, _), (strategy, a))| {
            let n = a.samples.max(1) as f64;
            SavingsRow {
                sweep,
                strategy,
                samples: a.samples,
                failed: a.failed,
                vs_cloud_pct: if a.samples == 0 { f64::NAN } else { a.vs_cloud / n },
                vs_cf_optimal_pct: if a.samples == 0 { f64::NAN } else { a.vs_cf / n },
            }
        })
        .collect())
}

/// One point of a plot series: mean total watts over replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub sweep: SweepKind,
    pub demand_mean: f64,
    pub mean_total_w: f64,
    pub min_total_w: f64,
    pub max_total_w: f64,
    pub replications: usize,
}

/// Per-strategy series of mean total power against the swept demand mean.
pub fn plot_series(rows: &[SweepRow]) -> BTreeMap<&'static str, Vec<PlotPoint>> {
    let mut groups: BTreeMap<(&'static str, SweepKind, usize), (f64, Vec<f64>)> = BTreeMap::new();
    for r in rows {
        if let Some(t) = r.total_w {
            groups
                .entry((r.strategy.as_str(), r.sweep, r.point))
                .or_insert_with(|| (r.demand_mean, Vec::new()))
                .1
                .push(t);
        }
    }
    let mut out: BTreeMap<&'static str, Vec<PlotPoint>> = BTreeMap::new();
    for ((strategy, sweep, _), (demand_mean, totals)) in groups {
        let n = totals.len();
        out.entry(strategy).or_default().push(PlotPoint {
            sweep,
            demand_mean,
            mean_total_w: totals.iter().sum::<f64>() / n as f64,
            min_total_w: totals.iter().copied().fold(f64::INFINITY, f64::min),
            max_total_w: totals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            replications: n,
        });
    }
    out
}

fn write_csv<T: Serialize>(items: &[T], path: &Path, delimiter: u8, header: &[&str]) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for item in items {
        w.serialize(item).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub const RESULT_COLUMNS: [&str; 18] = [
    "sweep",
    "point",
    "demand_mean",
    "replication",
    "seed",
    "strategy",
    "total_w",
    "proc_cloud_w",
    "proc_fog_w",
    "proc_vc_w",
    "net_w",
    "shared_w",
    "ghz_cloud",
    "ghz_fog",
    "ghz_vc",
    "milp_objective_w",
    "bound_gap_w",
    "status",
];

const TIMING_COLUMNS: [&str; 7] = ["sweep", "point", "replication", "strategy", "solve_ms", "iterations", "nodes"];
const SAVINGS_COLUMNS: [&str; 6] = ["sweep", "strategy", "samples", "failed", "vs_cloud_pct", "vs_cf_optimal_pct"];
const PLOT_COLUMNS: [&str; 6] = [
    "sweep",
    "demand_mean",
    "mean_total_w",
    "min_total_w",
    "max_total_w",
    "replications",
];

pub fn write_results(rows: &[SweepRow], path: &Path) -> Result<(), HarnessError> {
    write_csv(rows, path, b',', &RESULT_COLUMNS)
}

pub fn read_results(path: &Path) -> Result<Vec<SweepRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err(path))
}

pub fn write_timings(rows: &[TimingRow], path: &Path) -> Result<(), HarnessError> {
    write_csv(rows, path, b',', &TIMING_COLUMNS)
}

pub fn write_savings(rows: &[SavingsRow], path: &Path) -> Result<(), HarnessError> {
    write_csv(rows, path, b',', &SAVINGS_COLUMNS)
}

pub fn read_savings(path: &Path) -> Result<Vec<SavingsRow>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<Result<_, _>>().map_err(csv_err(path))
}

/// Writes `<dir>/<strategy>.tsv` for every strategy with at least one row.
pub fn write_plot_data(rows: &[SweepRow], dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for (strategy, points) in plot_series(rows) {
        let path = dir.join(format!("{strategy}.tsv"));
        write_csv(&points, &path, b'\t', &PLOT_COLUMNS)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub generator: String,
    pub config_hash: String,
    pub architecture_fingerprint: String,
    pub sweeps: Vec<SweepKind>,
    pub strategies: Vec<Strategy>,
    pub replications: usize,
    pub rows: usize,
    pub status_counts: BTreeMap<String, usize>,
    pub failures: Vec<String>,
    pub total_solve_ms: f64,
    pub config: ScenarioConfig,
}

pub fn manifest(cfg: &ScenarioConfig, result: &SweepResult) -> Result<Manifest, HarnessError> {
    let mut status_counts = BTreeMap::new();
    for r in &result.rows {
        *status_counts.entry(format!("{:?}", r.status)).or_insert(0) += 1;
    }
    Ok(Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.harness.seed,
        generator: GENERATOR.to_string(),
        config_hash: cfg.hash(),
        architecture_fingerprint: cfg.build()?.fingerprint,
        sweeps: cfg.harness.sweeps.clone(),
        strategies: row_order(&cfg.harness.strategies),
        replications: cfg.harness.replications,
        rows: result.rows.len(),
        status_counts,
        failures: result.failures.clone(),
        total_solve_ms: result.timings.iter().map(|t| t.solve_ms).sum(),
        config: cfg.clone(),
    })
}

/// Writes results, timings, savings (when both baselines ran), plot data
/// and the manifest under `dir`.
pub fn write_outputs(cfg: &ScenarioConfig, result: &SweepResult, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_results(&result.rows, &dir.join(RESULTS_FILE))?;
    write_timings(&result.timings, &dir.join(TIMINGS_FILE))?;
    let has = |s: Strategy| cfg.harness.strategies.contains(&s);
    if has(Strategy::Cloud) && has(Strategy::CfOptimal) {
        write_savings(&savings_table(&result.rows)?, &dir.join(SAVINGS_FILE))?;
    }
    write_plot_data(&result.rows, &dir.join(PLOT_DIR))?;
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest(cfg, result)?).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(io_err(&path))
}
