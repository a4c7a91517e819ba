//! Seeded task generation and the two demand sweeps.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the generator behind [`sample_tasks`], recorded in run manifests.
pub const GENERATOR: &str = "ChaCha8Rng (rand_chacha 0.9), Normal from rand_distr 0.5";

/// Draws below this fraction of the mean are rejected and redrawn.
pub const TRUNCATION_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: usize,
    /// GHz.
    pub proc_demand: f64,
    /// Mb/s.
    pub traffic_demand: f64,
}

impl Task {
    pub fn new(id: usize, proc_demand: f64, traffic_demand: f64) -> Self {
        Self {
            id,
            proc_demand,
            traffic_demand,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum WorkloadError {
    #[error("{0} must be positive and finite")]
    NonPositiveMean(&'static str),
    #[error("{0} must be non-negative and finite")]
    NegativeSd(&'static str),
    #[error("unknown sweep kind `{0}` (expected traffic or processing)")]
    UnknownSweep(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandSpec {
    pub proc_mean_ghz: f64,
    pub proc_sd_ghz: f64,
    pub traffic_mean_mbps: f64,
    pub traffic_sd_mbps: f64,
    pub count: usize,
    pub seed: u64,
}

impl Default for DemandSpec {
    fn default() -> Self {
        Self {
            proc_mean_ghz: 1.0,
            proc_sd_ghz: 0.5,
            traffic_mean_mbps: 50.0,
            traffic_sd_mbps: 5.0,
            count: 50,
            seed: 0,
        }
    }
}

impl DemandSpec {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        let non_negative = |v: f64| v >= 0.0 && v.is_finite();
        if !positive(self.proc_mean_ghz) {
            return Err(WorkloadError::NonPositiveMean("proc_mean_ghz"));
        }
        if !positive(self.traffic_mean_mbps) {
            return Err(WorkloadError::NonPositiveMean("traffic_mean_mbps"));
        }
        if !non_negative(self.proc_sd_ghz) {
            return Err(WorkloadError::NegativeSd("proc_sd_ghz"));
        }
        if !non_negative(self.traffic_sd_mbps) {
            return Err(WorkloadError::NegativeSd("traffic_sd_mbps"));
        }
        Ok(())
    }

    /// Same spec with a different seed.
    pub fn reseeded(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

fn truncated_draw(dist: &Normal<f64>, floor: f64, rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let v = dist.sample(rng);
        if v >= floor {
            return v;
        }
    }
}

/// Draws `spec.count` tasks; each task takes its processing draw first, then
/// its traffic draw, from one generator seeded with `spec.seed`.
pub fn sample_tasks(spec: &DemandSpec) -> Result<Vec<Task>, WorkloadError> {
    spec.validate()?;
    let proc = Normal::new(spec.proc_mean_ghz, spec.proc_sd_ghz).expect("validated");
    let traffic = Normal::new(spec.traffic_mean_mbps, spec.traffic_sd_mbps).expect("validated");
    let proc_floor = TRUNCATION_FLOOR * spec.proc_mean_ghz;
    let traffic_floor = TRUNCATION_FLOOR * spec.traffic_mean_mbps;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..spec.count)
        .map(|id| {
            let w = truncated_draw(&proc, proc_floor, &mut rng);
            let d = truncated_draw(&traffic, traffic_floor, &mut rng);
            Task::new(id, w, d)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Traffic,
    Processing,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Traffic => "traffic",
            SweepKind::Processing => "processing",
        }
    }

    /// The swept mean of a spec.
    pub fn mean_of(self, spec: &DemandSpec) -> f64 {
        match self {
            SweepKind::Traffic => spec.traffic_mean_mbps,
            SweepKind::Processing => spec.proc_mean_ghz,
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepKind {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "traffic" => Ok(SweepKind::Traffic),
            "processing" => Ok(SweepKind::Processing),
            other => Err(WorkloadError::UnknownSweep(other.to_string())),
        }
    }
}

pub const SWEEP_POINTS: usize = 10;

/// Ten specs stepping the swept mean: traffic 10..=100 Mb/s, processing
/// 0.1..=1.0 GHz. Every other field comes from `base`; point `k` is seeded
/// with `base.seed + k`.
pub fn sweep_specs(kind: SweepKind, base: &DemandSpec) -> Vec<DemandSpec> {
    (1..=SWEEP_POINTS)
        .map(|k| {
            let mut spec = base.reseeded(base.seed.wrapping_add(k as u64 - 1));
            match kind {
                SweepKind::Traffic => spec.traffic_mean_mbps = 10.0 * k as f64,
                SweepKind::Processing => spec.proc_mean_ghz = k as f64 / 10.0,
            }
            spec
        })
        .collect()
}

/// Seed of replication `r` at a sweep point seeded with `point_seed`.
/// Points use consecutive seeds, so replications stride by 1000 to stay apart.
pub fn replication_seed(point_seed: u64, replication: usize) -> u64 {
    point_seed.wrapping_add(1000u64.wrapping_mul(replication as u64))
}
