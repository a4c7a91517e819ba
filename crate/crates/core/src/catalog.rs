//! Hardware catalog and the load-proportional energy intensities derived from it.
//!
//! Every device is modeled as drawing `max_power * load / capacity`, with no
//! idle term. The intensity `max_power / capacity` (W per GHz or W per Mb/s)
//! is therefore the only quantity the optimizer ever sees.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKind {
    Processing,
    Network,
}

/// Capacity units accepted on construction. Network rates are normalized to Mb/s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CapacityUnit {
    #[serde(rename = "GHz")]
    Ghz,
    #[serde(rename = "Mb/s")]
    Mbps,
    #[serde(rename = "Gb/s")]
    Gbps,
    #[serde(rename = "Tb/s")]
    Tbps,
}

impl CapacityUnit {
    fn kind(self) -> DeviceKind {
        match self {
            CapacityUnit::Ghz => DeviceKind::Processing,
            _ => DeviceKind::Network,
        }
    }

    fn to_base(self, value: f64) -> f64 {
        match self {
            CapacityUnit::Ghz | CapacityUnit::Mbps => value,
            CapacityUnit::Gbps => value * 1e3,
            CapacityUnit::Tbps => value * 1e6,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CatalogError {
    #[error("device `{id}`: capacity must be positive, got {value}")]
    NonPositiveCapacity { id: String, value: f64 },
    #[error("device `{id}`: max power must be non-negative and finite, got {value}")]
    InvalidPower { id: String, value: f64 },
    #[error("device `{id}` is {kind:?} but its capacity is given in {unit:?}")]
    UnitMismatch {
        id: String,
        kind: DeviceKind,
        unit: CapacityUnit,
    },
    #[error("unknown device id `{0}`")]
    UnknownDevice(String),
}

/// One hardware element: capacity in GHz (processing) or Mb/s (network).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceProfile {
    pub id: String,
    pub label: String,
    pub kind: DeviceKind,
    capacity: f64,
    max_power: f64,
}

impl DeviceProfile {
    pub fn new(
        id: impl Into<String>,
        label: impl Into<String>,
        kind: DeviceKind,
        capacity: f64,
        unit: CapacityUnit,
        max_power: f64,
    ) -> Result<Self, CatalogError> {
        let id = id.into();
        if unit.kind() != kind {
            return Err(CatalogError::UnitMismatch { id, kind, unit });
        }
        if !(capacity > 0.0 && capacity.is_finite()) {
            return Err(CatalogError::NonPositiveCapacity { id, value: capacity });
        }
        if !(max_power >= 0.0 && max_power.is_finite()) {
            return Err(CatalogError::InvalidPower { id, value: max_power });
        }
        Ok(Self {
            id,
            label: label.into(),
            kind,
            capacity: unit.to_base(capacity),
            max_power,
        })
    }

    /// GHz for processing devices, Mb/s for network devices.
    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn max_power(&self) -> f64 {
        self.max_power
    }
}

/// Watts per unit of load: W/GHz for processing, W per Mb/s for network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyIntensity {
    pub value: f64,
    pub kind: DeviceKind,
}

impl fmt::Display for EnergyIntensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DeviceKind::Processing => write!(f, "{} W/GHz", self.value),
            DeviceKind::Network => write!(f, "{} W/(Mb/s)", self.value),
        }
    }
}

pub fn energy_intensity(profile: &DeviceProfile) -> EnergyIntensity {
    EnergyIntensity {
        value: profile.max_power / profile.capacity,
        kind: profile.kind,
    }
}

/// Fractional reduction of `candidate` relative to `baseline`; negative when
/// the candidate is less efficient.
pub fn efficiency_gain(candidate: EnergyIntensity, baseline: EnergyIntensity) -> f64 {
    1.0 - candidate.value / baseline.value
}

pub mod ids {
    pub const CONVENTIONAL_SERVER: &str = "conventional_server";
    pub const CLOUD_SWITCH: &str = "cloud_switch";
    pub const CLOUD_ROUTER: &str = "cloud_router";
    pub const CORE_ROUTER: &str = "core_router";
    pub const OPTICAL_SWITCH: &str = "optical_switch";
    pub const TRANSPONDER: &str = "transponder";
    pub const EDGE_ROUTER: &str = "edge_router";
    pub const AGGREGATION_SWITCH: &str = "aggregation_switch";
    pub const OLT: &str = "olt";
    pub const ONU: &str = "onu";
    pub const ACCESS_POINT: &str = "access_point";
    pub const RSU: &str = "rsu";
    pub const LOW_END_COMPUTER: &str = "low_end_computer";
    pub const OBU: &str = "obu";
    pub const VEHICLE_WIFI: &str = "vehicle_wifi";
    pub const FOG_SERVER: &str = "fog_server";
}

/// The sixteen built-in device profiles.
///
/// The optical switch row is listed at 63.2 kW in its source table for a
/// small 50-port access switch; that is read as a unit typo and 63.2 W is used.
/// Override `optical_switch` to restore the raw figure.
pub fn builtin_catalog() -> Vec<DeviceProfile> {
    use CapacityUnit::*;
    use DeviceKind::*;
    let rows: [(&str, &str, DeviceKind, f64, CapacityUnit, f64); 16] = [
        (ids::CONVENTIONAL_SERVER, "Conventional server", Processing, 4.0, Ghz, 300.0),
        (ids::CLOUD_SWITCH, "Cloud switch (Cisco 6509)", Network, 320.0, Gbps, 3800.0),
        (ids::CLOUD_ROUTER, "Cloud router (Juniper MX-960)", Network, 660.0, Gbps, 5100.0),
        (ids::CORE_ROUTER, "Core router (Cisco CRS 16-slots)", Network, 12.8, Tbps, 13900.0),
        (ids::OPTICAL_SWITCH, "Optical switch (Cisco SG220-50P)", Network, 100.0, Gbps, 63.2),
        (ids::TRANSPONDER, "Transponder (Cisco ONS 15454)", Network, 10.0, Gbps, 50.0),
        (ids::EDGE_ROUTER, "Edge router (Cisco 12816)", Network, 200.0, Gbps, 4200.0),
        (ids::AGGREGATION_SWITCH, "Aggregation switch (Cisco 6880)", Network, 160.0, Gbps, 3800.0),
        (ids::OLT, "OLT (Tellabs 1134)", Network, 320.0, Gbps, 400.0),
        (ids::ONU, "ONU (Tellabs ONT140C)", Network, 2.488, Gbps, 5.0),
        (ids::ACCESS_POINT, "Access point (Extreme 3825i/e)", Network, 1.75, Gbps, 7.42),
        (ids::RSU, "RSU (Savari SW-1000)", Network, 27.0, Mbps, 7.0),
        (ids::LOW_END_COMPUTER, "Low-end computer (Intel Atom)", Processing, 1.6, Ghz, 18.0),
        (ids::OBU, "OBU processor (AMOS-825)", Processing, 1.0, Ghz, 7.0),
        (ids::VEHICLE_WIFI, "Vehicle network Wi-Fi (CC3000 Module)", Network, 54.0, Mbps, 0.207),
        (ids::FOG_SERVER, "Fog server (Intel Core2-Q9400)", Processing, 2.66, Ghz, 95.0),
    ];
    rows.into_iter()
        .map(|(id, label, kind, cap, unit, power)| {
            DeviceProfile::new(id, label, kind, cap, unit, power).expect("built-in rows are valid")
        })
        .collect()
}

/// Partial replacement of a catalog entry, as read from scenario config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceOverride {
    pub id: String,
    #[serde(default)]
    pub capacity: Option<f64>,
    #[serde(default)]
    pub unit: Option<CapacityUnit>,
    #[serde(default)]
    pub max_power_w: Option<f64>,
}

/// Device profiles keyed by id. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Catalog {
    devices: BTreeMap<String, DeviceProfile>,
}

impl Default for Catalog {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Catalog {
    pub fn builtin() -> Self {
        Self::from_profiles(builtin_catalog())
    }

    pub fn from_profiles(profiles: impl IntoIterator<Item = DeviceProfile>) -> Self {
        Self {
            devices: profiles.into_iter().map(|p| (p.id.clone(), p)).collect(),
        }
    }

    pub fn with_overrides(mut self, overrides: &[DeviceOverride]) -> Result<Self, CatalogError> {
        for o in overrides {
            let current = self
                .devices
                .get(&o.id)
                .ok_or_else(|| CatalogError::UnknownDevice(o.id.clone()))?;
            let default_unit = match current.kind {
                DeviceKind::Processing => CapacityUnit::Ghz,
                DeviceKind::Network => CapacityUnit::Mbps,
            };
            let (capacity, unit) = match (o.capacity, o.unit) {
                (Some(c), u) => (c, u.unwrap_or(default_unit)),
                (None, _) => (current.capacity, default_unit),
            };
            let updated = DeviceProfile::new(
                current.id.clone(),
                current.label.clone(),
                current.kind,
                capacity,
                unit,
                o.max_power_w.unwrap_or(current.max_power),
            )?;
            self.devices.insert(updated.id.clone(), updated);
        }
        Ok(self)
    }

    pub fn get(&self, id: &str) -> Result<&DeviceProfile, CatalogError> {
        self.devices
            .get(id)
            .ok_or_else(|| CatalogError::UnknownDevice(id.to_string()))
    }

    /// Finds a device by id or by a case-insensitive label prefix, so both
    /// `obu` and `"OBU processor"` resolve.
    pub fn lookup(&self, key: &str) -> Option<&DeviceProfile> {
        if let Some(p) = self.devices.get(key) {
            return Some(p);
        }
        let key = key.to_ascii_lowercase();
        self.devices
            .values()
            .find(|p| p.label.to_ascii_lowercase().starts_with(&key))
    }

    pub fn intensity(&self, id: &str) -> Result<EnergyIntensity, CatalogError> {
        self.get(id).map(energy_intensity)
    }

    pub fn iter(&self) -> impl Iterator<Item = &DeviceProfile> {
        self.devices.values()
    }

    pub fn len(&self) -> usize {
        self.devices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.devices.is_empty()
    }
}
