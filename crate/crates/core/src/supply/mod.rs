//! Mines and supply curves, coal quality, price premia and transport tariffs.

mod premium;
mod tariff;

pub use premium::{CokingMode, CsrGroup, PremiumModel};
pub use tariff::{link_unit_cost, link_unit_cost_cny, HandlingRule, LineTariff, Tariff, MWH_PER_PJ};

use crate::io::{read_table, IoError};
use crate::network::NodeId;
use crate::years::{Year, YearSeries};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use thiserror::Error;

/// PJ per kcal.
pub const KCAL_TO_PJ: f64 = 4.1868e-12;
/// PJ per TWh.
pub const PJ_PER_TWH: f64 = 3.6;
/// Country code of domestic supply.
pub const DOMESTIC: &str = "CN";

#[derive(Debug, Error)]
pub enum SupplyError {
    #[error("calorific value {0} kcal/kg has no bin")]
    BadCv(f64),
    #[error("negative correction factor {factor} for {country}")]
    NegativeFactor { country: String, factor: f64 },
    #[error("supply step {mine}: {reason}")]
    BadStep { mine: String, reason: String },
    #[error("duplicate supply step for {node} {coal_type} bin {bin}")]
    DuplicateStep {
        node: NodeId,
        coal_type: CoalType,
        bin: CvBin,
    },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoalType {
    Thermal,
    Hcc,
    Scc,
    Pci,
}

impl CoalType {
    pub const ALL: [CoalType; 4] = [CoalType::Thermal, CoalType::Hcc, CoalType::Scc, CoalType::Pci];
    pub const COKING: [CoalType; 3] = [CoalType::Hcc, CoalType::Scc, CoalType::Pci];

    pub fn as_str(self) -> &'static str {
        match self {
            CoalType::Thermal => "thermal",
            CoalType::Hcc => "hcc",
            CoalType::Scc => "scc",
            CoalType::Pci => "pci",
        }
    }

    pub fn is_coking(self) -> bool {
        self != CoalType::Thermal
    }
}

impl fmt::Display for CoalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CoalType {
    type Err = SupplyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CoalType::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| SupplyError::Config(format!("unknown coal type `{s}`")))
    }
}

/// Calorific value bin, kcal/kg: 0 or 3000..=7000 in steps of 250.
/// Bin 0 is used by coking coals, whose energy content does not enter the
/// energy balance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CvBin(u16);

impl CvBin {
    pub const ZERO: CvBin = CvBin(0);
    pub const STEP: u16 = 250;
    pub const MIN: u16 = 3000;
    pub const MAX: u16 = 7000;

    pub fn new(kcal: u16) -> Option<Self> {
        let ok = kcal == 0 || ((Self::MIN..=Self::MAX).contains(&kcal) && kcal.is_multiple_of(Self::STEP));
        ok.then_some(CvBin(kcal))
    }

    pub fn kcal(self) -> u16 {
        self.0
    }

    /// Every non-zero bin in ascending order.
    pub fn all_real() -> impl Iterator<Item = CvBin> {
        (Self::MIN..=Self::MAX).step_by(Self::STEP as usize).map(CvBin)
    }

    /// PJ per Mt of coal in this bin.
    pub fn pj_per_mt(self) -> f64 {
        f64::from(self.0) * 1e9 * KCAL_TO_PJ
    }
}

impl fmt::Display for CvBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Assigns a raw calorific value to the nearest bin, ties rounding up.
/// Values between 0 and 2875 kcal/kg have no bin; values above 7125 are
/// rejected unless `clamp_high` is set, in which case they map to 7000.
pub fn bin_cv(raw_cv: f64, clamp_high: bool) -> Result<CvBin, SupplyError> {
    if raw_cv == 0.0 {
        return Ok(CvBin::ZERO);
    }
    let lowest = f64::from(CvBin::MIN) - f64::from(CvBin::STEP) / 2.0;
    let highest = f64::from(CvBin::MAX) + f64::from(CvBin::STEP) / 2.0;
    if !raw_cv.is_finite() || raw_cv < lowest {
        return Err(SupplyError::BadCv(raw_cv));
    }
    if raw_cv > highest {
        return if clamp_high {
            Ok(CvBin(CvBin::MAX))
        } else {
            Err(SupplyError::BadCv(raw_cv))
        };
    }
    let step = f64::from(CvBin::STEP);
    let k = (raw_cv / step + 0.5).floor();
    Ok(CvBin((k * step) as u16).clamp(CvBin(CvBin::MIN), CvBin(CvBin::MAX)))
}

/// Energy content of `mass_mt` of coal in `bin`, PJ.
pub fn energy_content(mass_mt: f64, bin: CvBin) -> f64 {
    mass_mt * bin.pj_per_mt()
}

/// Quality attribute of a supply step: thermal coals carry a CV bin,
/// coking coals a CSR number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quality {
    Cv(CvBin),
    Csr(f64),
}

/// One point of a merit-order supply curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupplyStep {
    pub mine_id: String,
    pub node: NodeId,
    pub country: String,
    pub coal_type: CoalType,
    pub quality: Quality,
    /// Mt/yr
    pub prod_capa: YearSeries,
    /// $/t
    pub prod_cost: YearSeries,
    /// Mt
    pub reserves: f64,
}

impl SupplyStep {
    /// The CV bin under which this step's coal travels through the network.
    pub fn bin(&self) -> CvBin {
        match self.quality {
            Quality::Cv(bin) => bin,
            Quality::Csr(_) => CvBin::ZERO,
        }
    }

    pub fn is_domestic(&self) -> bool {
        self.country == DOMESTIC
    }

    pub fn check(&self) -> Result<(), SupplyError> {
        let bad = |reason: &str| SupplyError::BadStep {
            mine: self.mine_id.clone(),
            reason: reason.to_string(),
        };
        match (self.coal_type.is_coking(), self.quality) {
            (false, Quality::Csr(_)) => return Err(bad("thermal step carries a CSR")),
            (true, Quality::Cv(_)) => return Err(bad("coking step carries a CV bin")),
            (false, Quality::Cv(CvBin::ZERO)) => return Err(bad("thermal step in bin 0")),
            (true, Quality::Csr(c)) if !(0.0..=100.0).contains(&c) => return Err(bad("CSR outside 0-100")),
            _ => {}
        }
        let negative = |s: &YearSeries| s.min_value().is_some_and(|v| v < 0.0);
        if negative(&self.prod_capa) || negative(&self.prod_cost) || !(self.reserves >= 0.0) {
            return Err(bad("negative capacity, cost or reserves"));
        }
        Ok(())
    }

    /// Capacity in force, zero when not recorded.
    pub fn capacity(&self, year: Year) -> f64 {
        self.prod_capa.at(year).unwrap_or(0.0)
    }
}

/// Mine-gate cost net of the quality premium, $/t; `None` when the step has
/// no cost recorded for the year.
pub fn effective_cost(step: &SupplyStep, year: Year, premia: &PremiumModel) -> Option<f64> {
    let cost = step.prod_cost.at(year)?;
    let premium = match step.quality {
        Quality::Cv(bin) => premia.thermal_premium(bin),
        Quality::Csr(csr) => premia.coking_premium(csr),
    };
    Some(cost - premium)
}

/// Share of each exporter's supply curve available to Chinese buyers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrectionFactors {
    pub thermal: BTreeMap<String, f64>,
    pub coking: BTreeMap<String, f64>,
    pub rest_of_world_thermal: f64,
    pub rest_of_world_coking: f64,
}

impl Default for CorrectionFactors {
    fn default() -> Self {
        let map = |pairs: &[(&str, f64)]| pairs.iter().map(|(c, f)| (c.to_string(), *f)).collect();
        Self {
            thermal: map(&[
                ("AU", 0.241),
                ("ID", 0.293),
                ("RU", 0.143),
                ("MN", 1.0),
                ("CA", 0.558),
                ("PH", 0.763),
            ]),
            coking: map(&[("AU", 0.168), ("ID", 0.081), ("RU", 0.196), ("MN", 1.0), ("CA", 0.099)]),
            rest_of_world_thermal: 0.014,
            rest_of_world_coking: 0.031,
        }
    }
}

impl CorrectionFactors {
    pub fn factor(&self, country: &str, coal_type: CoalType) -> f64 {
        if country == DOMESTIC {
            return 1.0;
        }
        let (table, rest) = if coal_type.is_coking() {
            (&self.coking, self.rest_of_world_coking)
        } else {
            (&self.thermal, self.rest_of_world_thermal)
        };
        table.get(country).copied().unwrap_or(rest)
    }

    fn check(&self) -> Result<(), SupplyError> {
        let all = self
            .thermal
            .iter()
            .chain(&self.coking)
            .map(|(c, f)| (c.as_str(), *f))
            .chain([("rest of world", self.rest_of_world_thermal), ("rest of world", self.rest_of_world_coking)]);
        for (country, factor) in all {
            if !(factor >= 0.0) {
                return Err(SupplyError::NegativeFactor {
                    country: country.to_string(),
                    factor,
                });
            }
        }
        Ok(())
    }
}

/// Scales the capacity of each foreign step by its country factor. Costs
/// and step order are unchanged; domestic steps are left alone.
pub fn correct_global_curve(
    steps: &[SupplyStep],
    factors: &CorrectionFactors,
) -> Result<Vec<SupplyStep>, SupplyError> {
    factors.check()?;
    Ok(steps
        .iter()
        .map(|step| {
            let mut step = step.clone();
            let f = factors.factor(&step.country, step.coal_type);
            for v in step.prod_capa.values_mut() {
                *v *= f;
            }
            step
        })
        .collect())
}

/// All supply steps of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SupplyBook {
    pub steps: Vec<SupplyStep>,
}

impl SupplyBook {
    /// Checks every step and rejects two steps feeding the same
    /// `(node, coal type, bin)` supply variable.
    pub fn new(steps: Vec<SupplyStep>) -> Result<Self, SupplyError> {
        let mut seen = BTreeSet::new();
        for step in &steps {
            step.check()?;
            if !seen.insert((step.node.clone(), step.coal_type, step.bin())) {
                return Err(SupplyError::DuplicateStep {
                    node: step.node.clone(),
                    coal_type: step.coal_type,
                    bin: step.bin(),
                });
            }
        }
        Ok(Self { steps })
    }

    pub fn step_for(&self, node: &NodeId, coal_type: CoalType, bin: CvBin) -> Option<&SupplyStep> {
        self.steps
            .iter()
            .find(|s| &s.node == node && s.coal_type == coal_type && s.bin() == bin)
    }

    pub fn by_mine(&self, mine_id: &str) -> impl Iterator<Item = &SupplyStep> + '_ {
        let mine_id = mine_id.to_string();
        self.steps.iter().filter(move |s| s.mine_id == mine_id)
    }
}

const SUPPLY_COLUMNS: &[&str] = &["mine_id", "node_id", "country", "coal_type", "cv", "csr", "reserves_Mt"];

/// Reads `supply.csv`. Raw CVs are binned; `clamp_high` maps CVs above the
/// top bin to 7000 instead of rejecting them.
pub fn load_supply(path: &Path, clamp_high: bool) -> Result<(SupplyBook, Vec<String>), SupplyError> {
    let mut steps = Vec::new();
    let mut failure = None;
    let warnings = read_table(path, SUPPLY_COLUMNS, &["capacity", "cost"], |row| {
        let parsed = (|| {
            let coal_type: CoalType = row.required("coal_type")?.parse()?;
            let quality = if coal_type.is_coking() {
                Quality::Csr(row.f64("csr")?)
            } else {
                Quality::Cv(bin_cv(row.f64("cv")?, clamp_high)?)
            };
            Ok::<_, SupplyError>(SupplyStep {
                mine_id: row.required("mine_id")?.to_string(),
                node: row.required("node_id")?.into(),
                country: row.get("country").unwrap_or(DOMESTIC).to_string(),
                coal_type,
                quality,
                prod_capa: row.series("capacity")?,
                prod_cost: row.series("cost")?,
                reserves: row.f64_opt("reserves_Mt")?.unwrap_or(f64::INFINITY),
            })
        })();
        match parsed {
            Ok(step) => {
                steps.push(step);
                Ok(())
            }
            Err(SupplyError::Io(e)) => Err(e),
            Err(e) => {
                let msg = e.to_string();
                failure = Some(e);
                Err(row.err(msg))
            }
        }
    });
    match (warnings, failure) {
        (_, Some(e)) => Err(e),
        (Err(e), None) => Err(e.into()),
        (Ok(w), None) => Ok((SupplyBook::new(steps)?, w)),
    }
}
