//! Scenario configuration: one JSON document covering catalog overrides,
//! architecture, workload, solver tolerances and harness settings.
//!
//! ```json
//! {
//!   "catalog_overrides": [{ "id": "optical_switch", "max_power_w": 63200 }],
//!   "architecture": { "vehicles": 20, "fog_servers": 15, "core_hops": 2 },
//!   "workload": { "proc_mean_ghz": 1.0, "proc_sd_ghz": 0.5, "traffic_mean_mbps": 50, "traffic_sd_mbps": 5, "count": 50 },
//!   "solver": { "feasibility_tol": 1e-7 },
//!   "harness": { "replications": 5, "seed": 1, "single_max_nodes": 1000 }
//! }
//! ```
//!
//! Every section and field is optional; missing values take the defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::architecture::{build_architecture, Architecture, ArchitectureConfig, ArchitectureError};
use crate::catalog::{Catalog, CatalogError, DeviceOverride};
use crate::optimizer::SolverOptions;
use crate::strategies::Strategy;
use crate::workload::{DemandSpec, SweepKind, WorkloadError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Architecture(#[from] ArchitectureError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error("harness.replications must be at least 1")]
    NoReplications,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub replications: usize,
    /// Master seed; sweep point `k` samples with `seed + k`.
    pub seed: u64,
    pub sweeps: Vec<SweepKind>,
    pub strategies: Vec<Strategy>,
    /// Branch-and-bound node budget for `cfv_single` during sweeps. `None`
    /// falls back to `solver.max_nodes`.
    pub single_max_nodes: Option<usize>,
    /// Worker threads for sweep jobs; 0 lets the pool decide.
    pub threads: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            replications: 5,
            seed: 1,
            sweeps: vec![SweepKind::Traffic, SweepKind::Processing],
            strategies: Strategy::ALL.to_vec(),
            single_max_nodes: Some(1000),
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(alias = "catalog-overrides")]
    pub catalog_overrides: Vec<DeviceOverride>,
    pub architecture: ArchitectureConfig,
    /// Base demand spec; sweeps replace the swept mean and the seed.
    pub workload: DemandSpec,
    pub solver: SolverOptions,
    pub harness: HarnessConfig,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.workload.validate()?;
        if self.harness.replications == 0 {
            return Err(ConfigError::NoReplications);
        }
        self.build()?;
        Ok(())
    }

    pub fn catalog(&self) -> Result<Catalog, ConfigError> {
        Ok(Catalog::builtin().with_overrides(&self.catalog_overrides)?)
    }

    pub fn build(&self) -> Result<Architecture, ConfigError> {
        Ok(build_architecture(&self.catalog()?, &self.architecture)?)
    }

    /// Canonical JSON of the fully defaulted config.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Solver options for one strategy inside a sweep.
    pub fn solver_for(&self, strategy: Strategy) -> SolverOptions {
        match (strategy, self.harness.single_max_nodes) {
            (Strategy::CfvSingle, Some(n)) => SolverOptions {
                max_nodes: n,
                ..self.solver.clone()
            },
            _ => self.solver.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_default_scenario() {
        let cfg = ScenarioConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.build().unwrap().nodes.len(), 36);
        assert_eq!(cfg.harness.replications, 5);
    }

    #[test]
    fn sections_parse_and_override() {
        let cfg = ScenarioConfig::from_json(
            r#"{
                "catalog-overrides": [{"id": "optical_switch", "max_power_w": 63200}],
                "architecture": {"vehicles": 3, "fog_servers": 1},
                "workload": {"count": 7, "traffic_sd_mbps": 0},
                "solver": {"max_nodes": 10},
                "harness": {"replications": 2, "strategies": ["cloud", "cfv_single"], "sweeps": ["processing"]}
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.catalog().unwrap().get("optical_switch").unwrap().max_power(), 63200.0);
        assert_eq!(cfg.build().unwrap().nodes.len(), 5);
        assert_eq!(cfg.workload.count, 7);
        assert_eq!(cfg.workload.proc_mean_ghz, 1.0);
        assert_eq!(cfg.harness.strategies, vec![Strategy::Cloud, Strategy::CfvSingle]);
        assert_eq!(cfg.solver_for(Strategy::CfvSingle).max_nodes, 1000);
        assert_eq!(cfg.solver_for(Strategy::CfOptimal).max_nodes, 10);
    }

    #[test]
    fn invalid_documents_are_rejected() {
        assert!(matches!(ScenarioConfig::from_json(r#"{"bogus": 1}"#), Err(ConfigError::Parse(_))));
        assert!(matches!(
            ScenarioConfig::from_json(r#"{"harness": {"replications": 0}}"#),
            Err(ConfigError::NoReplications)
        ));
        assert!(matches!(
            ScenarioConfig::from_json(r#"{"catalog_overrides": [{"id": "nonexistent"}]}"#),
            Err(ConfigError::Catalog(_))
        ));
        assert!(matches!(
            ScenarioConfig::from_json(r#"{"architecture": {"vehicles": -1}}"#),
            Err(ConfigError::Architecture(_))
        ));
        assert!(matches!(
            ScenarioConfig::from_json(r#"{"workload": {"proc_mean_ghz": 0}}"#),
            Err(ConfigError::Workload(_))
        ));
    }

    #[test]
    fn hash_tracks_content() {
        let a = ScenarioConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.harness.seed = 2;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
