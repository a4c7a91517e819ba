//! Three-tier topology: vehicles, metro fog servers, and one aggregate cloud.
//!
//! Each processing node carries the chain of network devices its traffic
//! crosses. Devices listed as shared (the RSU by default) are crossed by every
//! task regardless of placement, so their power is a scenario constant.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::catalog::{ids, Catalog, CatalogError, DeviceKind};
use crate::workload::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Cloud,
    Fog,
    Vc,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Cloud, Tier::Fog, Tier::Vc];

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Cloud => "cloud",
            Tier::Fog => "fog",
            Tier::Vc => "vc",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ArchitectureError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("{field} must be non-negative, got {value}")]
    NegativeCount { field: &'static str, value: i64 },
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("device `{0}` on a network path is a processing device")]
    NotANetworkDevice(String),
    #[error("device `{0}` used as a processor is a network device")]
    NotAProcessingDevice(String),
    #[error("hop `{0}` has multiplicity 0")]
    ZeroMultiplicity(String),
    #[error("node `{id}`: {what} must be positive")]
    NonPositiveCapacity { id: String, what: &'static str },
    #[error("no cloud-tier node with unbounded processing and link capacity")]
    NoUnboundedCloud,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopSpec {
    pub device: String,
    #[serde(default = "one")]
    pub multiplicity: u32,
}

fn one() -> u32 {
    1
}

impl HopSpec {
    pub fn new(device: &str, multiplicity: u32) -> Self {
        Self {
            device: device.to_string(),
            multiplicity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hop {
    pub device: String,
    pub multiplicity: u32,
    /// W per Mb/s of one device instance.
    pub intensity: f64,
}

/// Ordered device chain between the RSU and a processing node.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct NetworkPath {
    pub hops: Vec<Hop>,
}

impl NetworkPath {
    pub fn new(catalog: &Catalog, specs: &[HopSpec]) -> Result<Self, ArchitectureError> {
        let hops = specs
            .iter()
            .map(|s| {
                let dev = catalog.get(&s.device)?;
                if dev.kind != DeviceKind::Network {
                    return Err(ArchitectureError::NotANetworkDevice(s.device.clone()));
                }
                if s.multiplicity == 0 {
                    return Err(ArchitectureError::ZeroMultiplicity(s.device.clone()));
                }
                Ok(Hop {
                    device: s.device.clone(),
                    multiplicity: s.multiplicity,
                    intensity: crate::catalog::energy_intensity(dev).value,
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { hops })
    }

    /// Sum over hops of multiplicity times device intensity, W per Mb/s.
    pub fn intensity(&self) -> f64 {
        self.hops
            .iter()
            .map(|h| f64::from(h.multiplicity) * h.intensity)
            .sum()
    }
}

/// An assignable compute destination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessingNode {
    pub id: String,
    pub tier: Tier,
    /// GHz; `None` is unbounded.
    pub proc_capacity: Option<f64>,
    /// W per GHz.
    pub proc_intensity: f64,
    pub path: NetworkPath,
    /// Mb/s; `None` is unbounded.
    pub link_capacity: Option<f64>,
}

pub fn path_intensity(node: &ProcessingNode) -> f64 {
    node.path.intensity()
}

impl ProcessingNode {
    pub fn is_unbounded(&self) -> bool {
        self.proc_capacity.is_none() && self.link_capacity.is_none()
    }
}

/// Explicitly described node, added after the generated tiers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    pub tier: Tier,
    pub processor: String,
    /// Defaults to the processor's capacity unless `unbounded` is set.
    #[serde(default)]
    pub proc_capacity_ghz: Option<f64>,
    #[serde(default)]
    pub unbounded: bool,
    pub path: Vec<HopSpec>,
    #[serde(default)]
    pub link_capacity_mbps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArchitectureConfig {
    pub vehicles: i64,
    pub fog_servers: i64,
    /// Core-network traversals on the cloud path (router + transponder + optical switch each).
    pub core_hops: i64,
    pub vc_path: Option<Vec<HopSpec>>,
    pub fog_path: Option<Vec<HopSpec>>,
    pub cloud_path: Option<Vec<HopSpec>>,
    pub shared_devices: Vec<String>,
    /// Per-vehicle wireless capacity; defaults to the vehicle Wi-Fi rating.
    pub vehicle_link_capacity_mbps: Option<f64>,
    /// Caps total traffic into the vehicular tier at the access point rating.
    pub enforce_access_point_capacity: bool,
    /// Processing device whose full rated power is charged as a constant
    /// whenever at least one task is present.
    pub control_plane_device: Option<String>,
    pub extra_nodes: Vec<NodeSpec>,
}

impl Default for ArchitectureConfig {
    fn default() -> Self {
        Self {
            vehicles: 20,
            fog_servers: 15,
            core_hops: 2,
            vc_path: None,
            fog_path: None,
            cloud_path: None,
            shared_devices: vec![ids::RSU.to_string()],
            vehicle_link_capacity_mbps: None,
            enforce_access_point_capacity: false,
            control_plane_device: None,
            extra_nodes: Vec::new(),
        }
    }
}

pub fn default_vc_path() -> Vec<HopSpec> {
    vec![HopSpec::new(ids::ACCESS_POINT, 1), HopSpec::new(ids::VEHICLE_WIFI, 1)]
}

pub fn default_fog_path() -> Vec<HopSpec> {
    vec![
        HopSpec::new(ids::ONU, 1),
        HopSpec::new(ids::OLT, 1),
        HopSpec::new(ids::AGGREGATION_SWITCH, 1),
    ]
}

pub fn default_cloud_path(core_hops: u32) -> Vec<HopSpec> {
    let mut path = default_fog_path();
    path.push(HopSpec::new(ids::EDGE_ROUTER, 1));
    if core_hops > 0 {
        path.push(HopSpec::new(ids::CORE_ROUTER, core_hops));
        path.push(HopSpec::new(ids::TRANSPONDER, core_hops));
        path.push(HopSpec::new(ids::OPTICAL_SWITCH, core_hops));
    }
    path.push(HopSpec::new(ids::CLOUD_ROUTER, 1));
    path.push(HopSpec::new(ids::CLOUD_SWITCH, 1));
    path
}

/// The built topology. Immutable; share freely across evaluations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Architecture {
    pub catalog: Catalog,
    pub nodes: Vec<ProcessingNode>,
    /// `(device id, W per Mb/s)` charged on every task's traffic.
    pub shared_devices: Vec<(String, f64)>,
    /// Aggregate Mb/s cap on the vehicular tier, when enforced.
    pub vc_access_capacity: Option<f64>,
    pub control_plane_watts: f64,
    pub fingerprint: String,
}

fn non_negative(field: &'static str, value: i64) -> Result<u32, ArchitectureError> {
    u32::try_from(value).map_err(|_| ArchitectureError::NegativeCount { field, value })
}

pub fn build_architecture(catalog: &Catalog, config: &ArchitectureConfig) -> Result<Architecture, ArchitectureError> {
    let vehicles = non_negative("vehicles", config.vehicles)?;
    let fog_servers = non_negative("fog_servers", config.fog_servers)?;
    let core_hops = non_negative("core_hops", config.core_hops)?;

    let processor = |id: &str| -> Result<(f64, f64), ArchitectureError> {
        let dev = catalog.get(id)?;
        if dev.kind != DeviceKind::Processing {
            return Err(ArchitectureError::NotAProcessingDevice(id.to_string()));
        }
        Ok((dev.capacity(), crate::catalog::energy_intensity(dev).value))
    };

    let vc_path = NetworkPath::new(catalog, config.vc_path.as_deref().unwrap_or(&default_vc_path()))?;
    let fog_path = NetworkPath::new(catalog, config.fog_path.as_deref().unwrap_or(&default_fog_path()))?;
    let cloud_path = NetworkPath::new(
        catalog,
        config
            .cloud_path
            .as_deref()
            .unwrap_or(&default_cloud_path(core_hops)),
    )?;

    let vehicle_link = match config.vehicle_link_capacity_mbps {
        Some(c) => c,
        None => catalog.get(ids::VEHICLE_WIFI)?.capacity(),
    };
    if !(vehicle_link > 0.0) {
        return Err(ArchitectureError::NonPositiveCapacity {
            id: "vehicles".into(),
            what: "link capacity",
        });
    }

    let mut nodes = Vec::new();
    let (obu_cap, obu_int) = processor(ids::OBU)?;
    for v in 0..vehicles {
        nodes.push(ProcessingNode {
            id: format!("vc-{:02}", v + 1),
            tier: Tier::Vc,
            proc_capacity: Some(obu_cap),
            proc_intensity: obu_int,
            path: vc_path.clone(),
            link_capacity: Some(vehicle_link),
        });
    }
    let (fog_cap, fog_int) = processor(ids::FOG_SERVER)?;
    for f in 0..fog_servers {
        nodes.push(ProcessingNode {
            id: format!("fog-{:02}", f + 1),
            tier: Tier::Fog,
            proc_capacity: Some(fog_cap),
            proc_intensity: fog_int,
            path: fog_path.clone(),
            link_capacity: None,
        });
    }
    let (_, server_int) = processor(ids::CONVENTIONAL_SERVER)?;
    nodes.push(ProcessingNode {
        id: "cloud".into(),
        tier: Tier::Cloud,
        proc_capacity: None,
        proc_intensity: server_int,
        path: cloud_path,
        link_capacity: None,
    });

    for spec in &config.extra_nodes {
        let (cap, intensity) = processor(&spec.processor)?;
        let proc_capacity = if spec.unbounded {
            None
        } else {
            Some(spec.proc_capacity_ghz.unwrap_or(cap))
        };
        if proc_capacity.is_some_and(|c| !(c > 0.0)) {
            return Err(ArchitectureError::NonPositiveCapacity {
                id: spec.id.clone(),
                what: "processing capacity",
            });
        }
        if spec.link_capacity_mbps.is_some_and(|c| !(c > 0.0)) {
            return Err(ArchitectureError::NonPositiveCapacity {
                id: spec.id.clone(),
                what: "link capacity",
            });
        }
        nodes.push(ProcessingNode {
            id: spec.id.clone(),
            tier: spec.tier,
            proc_capacity,
            proc_intensity: intensity,
            path: NetworkPath::new(catalog, &spec.path)?,
            link_capacity: spec.link_capacity_mbps,
        });
    }

    let mut seen = HashSet::new();
    for n in &nodes {
        if !seen.insert(n.id.as_str()) {
            return Err(ArchitectureError::DuplicateNode(n.id.clone()));
        }
    }

    let shared_devices = config
        .shared_devices
        .iter()
        .map(|id| {
            let dev = catalog.get(id)?;
            if dev.kind != DeviceKind::Network {
                return Err(ArchitectureError::NotANetworkDevice(id.clone()));
            }
            Ok((id.clone(), crate::catalog::energy_intensity(dev).value))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let vc_access_capacity = if config.enforce_access_point_capacity {
        Some(catalog.get(ids::ACCESS_POINT)?.capacity())
    } else {
        None
    };
    let control_plane_watts = match &config.control_plane_device {
        Some(id) => catalog.get(id)?.max_power(),
        None => 0.0,
    };

    let fingerprint = fingerprint(catalog, config);
    let arch = Architecture {
        catalog: catalog.clone(),
        nodes,
        shared_devices,
        vc_access_capacity,
        control_plane_watts,
        fingerprint,
    };
    arch.cloud_index()?;
    Ok(arch)
}

fn fingerprint(catalog: &Catalog, config: &ArchitectureConfig) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(catalog).expect("catalog serializes"));
    h.update(serde_json::to_vec(config).expect("config serializes"));
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl Architecture {
    /// Index of the node the cloud strategy sends everything to.
    pub fn cloud_index(&self) -> Result<usize, ArchitectureError> {
        self.nodes
            .iter()
            .position(|n| n.tier == Tier::Cloud && n.is_unbounded())
            .ok_or(ArchitectureError::NoUnboundedCloud)
    }

    pub fn nodes_in(&self, tier: Tier) -> impl Iterator<Item = (usize, &ProcessingNode)> {
        self.nodes.iter().enumerate().filter(move |(_, n)| n.tier == tier)
    }

    /// Combined intensity of the shared devices, W per Mb/s.
    pub fn shared_intensity(&self) -> f64 {
        self.shared_devices.iter().map(|(_, i)| i).sum()
    }
}

/// Power of the devices every task crosses, independent of placement.
pub fn shared_overhead(arch: &Architecture, tasks: &[Task]) -> f64 {
    if tasks.is_empty() {
        return 0.0;
    }
    let traffic: f64 = tasks.iter().map(|t| t.traffic_demand).sum();
    arch.shared_intensity() * traffic + arch.control_plane_watts
}
