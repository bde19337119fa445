//! National coal demand, its disaggregation to demand nodes, the national
//! energy-balance adjustment and provincial projections.

mod allocate;
mod balance;
mod forecast;
mod model;
mod power;

pub use allocate::{allocate_sector, allocate_two_stage, heating_weights, ProxyTable};
pub use balance::{balance_adjust, AdjustedBalance, IndustryBalance};
pub use forecast::{
    flat_growth, forecast_offset, gdp_weighted, uniform_scale, DemandPreset, Offset, PresetRatios,
};
pub use model::{
    DemandConfig, DemandDiagnostics, DemandModel, GenerationTable, NationalDemand, PowerMode, ProvinceInfo, SteelShift,
    Trajectory,
};
pub use power::{gas_generation_from_shares, provincial_coal_power, PowerBreakdown, OTHER_SOURCES_SHARE};

use crate::io::IoError;
use crate::network::NodeId;
use crate::years::Year;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DemandError {
    #[error("{0}")]
    Domain(String),
    #[error("energy balance for {year}: `other` would become {other:.1} PJ (reported {reported:.1}, power added {added:.1})")]
    NegativeOther {
        year: Year,
        other: f64,
        reported: f64,
        added: f64,
    },
    #[error("no offset in [{lo}, {hi}] reaches the target {target} (sum at bounds {at_lo:.6e} .. {at_hi:.6e})")]
    NoOffset {
        lo: f64,
        hi: f64,
        target: f64,
        at_lo: f64,
        at_hi: f64,
    },
    #[error("missing demand input: {0}")]
    Missing(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

/// Demand sectors of the national statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    PowerGen,
    Steel,
    BuildingMaterials,
    Chemicals,
    Heating,
    Other,
}

impl Sector {
    pub const ALL: [Sector; 6] = [
        Sector::PowerGen,
        Sector::Steel,
        Sector::BuildingMaterials,
        Sector::Chemicals,
        Sector::Heating,
        Sector::Other,
    ];
    /// Thermal-coal sectors met at city nodes.
    pub const CITY: [Sector; 4] = [Sector::BuildingMaterials, Sector::Chemicals, Sector::Heating, Sector::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            Sector::PowerGen => "power_gen",
            Sector::Steel => "steel",
            Sector::BuildingMaterials => "building_materials",
            Sector::Chemicals => "chemicals",
            Sector::Heating => "heating",
            Sector::Other => "other",
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Sector {
    type Err = DemandError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Sector::ALL
            .into_iter()
            .find(|x| x.as_str() == s.trim())
            .ok_or_else(|| DemandError::Domain(format!("unknown sector `{s}`")))
    }
}

/// National quantity of one sector in one year: PJ electricity for power
/// generation, Mt primary steel for steel, PJ primary energy otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorDemand {
    pub sector: Sector,
    pub year: Year,
    pub national_qty: f64,
}

/// Coking coal consumed per tonne of primary steel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CokingMix {
    pub hcc: f64,
    pub scc: f64,
    pub pci: f64,
}

impl CokingMix {
    pub const STANDARD: CokingMix = CokingMix {
        hcc: 0.581,
        scc: 0.176,
        pci: 0.179,
    };

    pub fn total(&self) -> f64 {
        self.hcc + self.scc + self.pci
    }
}

impl Default for CokingMix {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// Coking coal requirement, Mt.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CokingDemand {
    pub hcc: f64,
    pub scc: f64,
    pub pci: f64,
}

impl CokingDemand {
    pub fn total(&self) -> f64 {
        self.hcc + self.scc + self.pci
    }
}

pub fn coking_demand(primary_steel_mt: f64, mix: &CokingMix) -> CokingDemand {
    CokingDemand {
        hcc: primary_steel_mt * mix.hcc,
        scc: primary_steel_mt * mix.scc,
        pci: primary_steel_mt * mix.pci,
    }
}

/// Node-level demand of one year.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct YearDemand {
    /// Electricity from coal, PJ, at provincial power demand nodes.
    pub elec: BTreeMap<NodeId, f64>,
    /// Primary thermal coal energy, PJ, at city nodes.
    pub other: BTreeMap<NodeId, f64>,
    /// Primary steel, Mt, at provincial steel demand nodes.
    pub steel: BTreeMap<NodeId, f64>,
}

impl YearDemand {
    pub fn total_elec(&self) -> f64 {
        self.elec.values().sum()
    }

    pub fn total_other(&self) -> f64 {
        self.other.values().sum()
    }

    pub fn total_steel(&self) -> f64 {
        self.steel.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.elec.values().chain(self.other.values()).chain(self.steel.values()).all(|v| *v == 0.0)
    }
}

/// Node-level demand by year.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DemandSet {
    pub years: BTreeMap<Year, YearDemand>,
}

impl DemandSet {
    pub fn year(&self, year: Year) -> Option<&YearDemand> {
        self.years.get(&year)
    }
}
