//! Input tables and the year-by-year construction of node-level demand.

use super::{
    allocate_sector, allocate_two_stage, balance_adjust, flat_growth, forecast_offset, gdp_weighted,
    heating_weights, provincial_coal_power, uniform_scale, CokingMix, DemandError, DemandPreset, IndustryBalance,
    ProxyTable, Sector, YearDemand,
};
use crate::io::{parse_toml, read_table, IoError};
use crate::network::{Network, NodeId, NodeKind};
use crate::supply::PJ_PER_TWH;
use crate::years::Year;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// How national power demand beyond the base year is spread over provinces.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMode {
    /// Historical provincial growth rates shifted by one common offset.
    #[default]
    HistoricalOffset,
    /// Same factor for every province.
    Uniform,
    /// Reductions proportional to relative GDP.
    GdpWeighted,
}

/// National demand path after the base year.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trajectory {
    /// Only years present in the national table.
    #[default]
    Historic,
    Preset(DemandPreset),
    /// Compound growth from the base year: `thermal` for power and city
    /// sectors, `coking` for steel.
    Cagr { thermal: f64, coking: f64 },
}

/// Adjustments of the steel demand split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteelShift {
    /// Inland provinces take this share of national steel demand.
    InlandShare(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DemandConfig {
    pub base_year: Year,
    pub coking_mix: CokingMix,
    /// Province whose HDD stands in for a province without one.
    pub hdd_neighbours: BTreeMap<String, String>,
}

impl Default for DemandConfig {
    fn default() -> Self {
        Self {
            base_year: 2019,
            coking_mix: CokingMix::STANDARD,
            hdd_neighbours: BTreeMap::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProvinceInfo {
    pub coastal: bool,
    pub gdp_index: f64,
}

/// Provincial thermal, gas and biomass generation, TWh.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationTable {
    pub thermal: BTreeMap<String, f64>,
    pub gas: BTreeMap<String, f64>,
    pub biomass: BTreeMap<String, f64>,
}

/// National figures for one year after the energy-balance adjustment.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NationalDemand {
    /// PJ electricity.
    pub power_elec: f64,
    /// Mt primary steel.
    pub steel: f64,
    /// PJ primary energy by city sector.
    pub city: BTreeMap<Sector, f64>,
    /// PJ taken out of `other` uses by the balance adjustment.
    pub other_reduction: Option<f64>,
}

/// Diagnostics recorded alongside a year's demand.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DemandDiagnostics {
    pub national: NationalDemand,
    /// Coal-fired share of thermal generation in the generation table used.
    pub coal_share: Option<f64>,
    pub clamped_provinces: Vec<String>,
    pub growth_offset: Option<f64>,
}

/// All demand inputs plus the scenario-controlled projection settings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DemandModel {
    pub config: DemandConfig,
    /// `(sector, year) -> qty` from the national table.
    pub national: BTreeMap<(Sector, Year), f64>,
    /// Reported power-industry consumption, PJ primary.
    pub power_industry: BTreeMap<Year, f64>,
    pub fleet_efficiency: BTreeMap<Year, f64>,
    pub generation: BTreeMap<Year, GenerationTable>,
    /// Province-level proxies by name (`building_materials`, `chemicals`,
    /// `population`, `steel`).
    pub proxies: BTreeMap<String, ProxyTable>,
    pub hdd: BTreeMap<String, Option<f64>>,
    /// City node id -> weight, by proxy name (`city_gdp`, `city_population`).
    pub city_proxies: BTreeMap<String, BTreeMap<String, f64>>,
    /// Historical growth rates of coal-fired generation by province.
    pub power_growth: BTreeMap<String, f64>,
    pub provinces: BTreeMap<String, ProvinceInfo>,
    pub trajectory: Trajectory,
    pub power_mode: PowerMode,
    pub steel_shift: Option<SteelShift>,
}

impl DemandModel {
    pub fn base_year(&self) -> Year {
        self.config.base_year
    }

    fn national_row(&self, sector: Sector, year: Year) -> Result<f64, DemandError> {
        self.national
            .get(&(sector, year))
            .copied()
            .ok_or_else(|| DemandError::Missing(format!("national {sector} demand for {year}")))
    }

    fn historic_national(&self, year: Year) -> Result<NationalDemand, DemandError> {
        let power_elec = self.national_row(Sector::PowerGen, year)?;
        let steel = self.national_row(Sector::Steel, year)?;
        let mut city = BTreeMap::new();
        for s in Sector::CITY {
            city.insert(s, self.national_row(s, year)?);
        }
        let mut other_reduction = None;
        if let (Some(&reported), Some(&eff)) = (self.power_industry.get(&year), self.fleet_efficiency.get(&year)) {
            let mut pj: BTreeMap<Sector, f64> = city.clone();
            pj.insert(Sector::PowerGen, reported);
            let adjusted = balance_adjust(
                &IndustryBalance { year, pj },
                power_elec,
                eff,
                steel,
                &self.config.coking_mix,
            )?;
            city.insert(Sector::Other, adjusted.pj[&Sector::Other]);
            other_reduction = Some(adjusted.other_reduction);
        }
        Ok(NationalDemand {
            power_elec,
            steel,
            city,
            other_reduction,
        })
    }

    /// National demand for `year` under the current trajectory.
    pub fn national_for(&self, year: Year) -> Result<NationalDemand, DemandError> {
        let base_year = self.base_year();
        if year <= base_year || self.trajectory == Trajectory::Historic {
            return self.historic_national(year);
        }
        let base = self.historic_national(base_year)?;
        let n = i32::from(year - base_year);
        let (power, steel, other) = match self.trajectory {
            Trajectory::Historic => unreachable!(),
            Trajectory::Preset(p) => p.table().ratios(year),
            Trajectory::Cagr { thermal, coking } => {
                if !(thermal > -1.0 && coking > -1.0) {
                    return Err(DemandError::Domain("growth rates must exceed -100%".into()));
                }
                let t = (1.0 + thermal).powi(n);
                (t, (1.0 + coking).powi(n), t)
            }
        };
        Ok(NationalDemand {
            power_elec: base.power_elec * power,
            steel: base.steel * steel,
            city: base.city.iter().map(|(s, v)| (*s, v * other)).collect(),
            other_reduction: base.other_reduction,
        })
    }

    fn generation_for(&self, year: Year) -> Result<&GenerationTable, DemandError> {
        self.generation
            .range(..=year)
            .next_back()
            .or_else(|| self.generation.iter().next())
            .map(|(_, g)| g)
            .ok_or_else(|| DemandError::Missing("provincial power generation table".into()))
    }

    /// Provincial coal-fired generation shares of `year`, scaled to `national`.
    fn provincial_power(
        &self,
        year: Year,
        national: f64,
        diag: &mut DemandDiagnostics,
    ) -> Result<BTreeMap<String, f64>, DemandError> {
        let g = self.generation_for(year)?;
        let breakdown = provincial_coal_power(&g.thermal, &g.gas, &g.biomass)?;
        diag.coal_share = Some(breakdown.coal_share);
        diag.clamped_provinces = breakdown.clamped.clone();
        allocate_sector(national, &ProxyTable::new(breakdown.by_province))
    }

    fn power_by_province(
        &self,
        year: Year,
        national: &NationalDemand,
        diag: &mut DemandDiagnostics,
    ) -> Result<BTreeMap<String, f64>, DemandError> {
        let base_year = self.base_year();
        if year <= base_year || self.trajectory == Trajectory::Historic {
            return self.provincial_power(year, national.power_elec, diag);
        }
        let base_national = self.historic_national(base_year)?;
        let base = self.provincial_power(base_year, base_national.power_elec, diag)?;
        let n = u32::from(year - base_year);
        let target = national.power_elec;
        match (self.trajectory, self.power_mode) {
            (Trajectory::Cagr { thermal, .. }, _) => flat_growth(&base, thermal, n),
            (_, PowerMode::Uniform) => uniform_scale(&base, target),
            (_, PowerMode::GdpWeighted) => {
                let idx = self.provinces.iter().map(|(p, i)| (p.clone(), i.gdp_index)).collect();
                gdp_weighted(&base, &idx, target)
            }
            (_, PowerMode::HistoricalOffset) => {
                let o = forecast_offset(&base, &self.power_growth, n, target)?;
                diag.growth_offset = Some(o.delta);
                Ok(o.projected)
            }
        }
    }

    fn proxy(&self, name: &str) -> Result<&ProxyTable, DemandError> {
        self.proxies
            .get(name)
            .ok_or_else(|| DemandError::Missing(format!("proxy table `{name}`")))
    }

    fn city_proxy(&self, names: &[&str]) -> Result<&BTreeMap<String, f64>, DemandError> {
        names
            .iter()
            .find_map(|n| self.city_proxies.get(*n))
            .ok_or_else(|| DemandError::Missing(format!("city proxy `{}`", names[0])))
    }

    fn steel_by_province(&self, national: f64) -> Result<BTreeMap<String, f64>, DemandError> {
        let mut out = allocate_sector(national, self.proxy("steel")?)?;
        if let Some(SteelShift::InlandShare(share)) = self.steel_shift {
            if !(0.0..=1.0).contains(&share) {
                return Err(DemandError::Domain(format!("inland steel share {share} not in [0, 1]")));
            }
            let coastal = |p: &str| self.provinces.get(p).map(|i| i.coastal);
            let mut inland_total = 0.0;
            for (p, v) in &out {
                match coastal(p) {
                    Some(false) => inland_total += v,
                    Some(true) => {}
                    None => return Err(DemandError::Missing(format!("coastal flag for province {p}"))),
                }
            }
            let coastal_total = national - inland_total;
            if inland_total <= 0.0 || coastal_total <= 0.0 {
                return Err(DemandError::Domain("steel split needs both inland and coastal demand".into()));
            }
            let (a, b) = (share * national / inland_total, (1.0 - share) * national / coastal_total);
            for (p, v) in out.iter_mut() {
                *v *= if coastal(p) == Some(true) { b } else { a };
            }
        }
        Ok(out)
    }

    /// Node-level demand of one year on `network`.
    pub fn demand_for(&self, year: Year, network: &Network) -> Result<(YearDemand, DemandDiagnostics), DemandError> {
        let mut diag = DemandDiagnostics::default();
        let national = self.national_for(year)?;
        let power = self.power_by_province(year, &national, &mut diag)?;
        let steel = self.steel_by_province(national.steel)?;

        let node_in = |kind: NodeKind, province: &str| -> Result<NodeId, DemandError> {
            network
                .nodes_of_kind(kind)
                .find(|n| n.province == province)
                .map(|n| n.id.clone())
                .ok_or_else(|| DemandError::Missing(format!("{kind} node for province {province}")))
        };
        let mut out = YearDemand::default();
        for (p, v) in power {
            if v > 0.0 {
                *out.elec.entry(node_in(NodeKind::ProvPowerDemand, &p)?).or_default() += v;
            }
        }
        for (p, v) in steel {
            if v > 0.0 {
                *out.steel.entry(node_in(NodeKind::ProvSteelDemand, &p)?).or_default() += v;
            }
        }

        let city_of = |weights: &BTreeMap<String, f64>| -> Result<BTreeMap<String, (String, f64)>, DemandError> {
            weights
                .iter()
                .map(|(c, w)| {
                    let node = network
                        .node(&NodeId::from(c.as_str()))
                        .filter(|n| n.kind == NodeKind::CityCenter)
                        .ok_or_else(|| DemandError::Missing(format!("city node `{c}`")))?;
                    Ok((c.clone(), (node.province.clone(), *w)))
                })
                .collect()
        };
        let gdp_cities = city_of(self.city_proxy(&["city_gdp"])?)?;
        let pop_cities = city_of(self.city_proxy(&["city_population", "city_gdp"])?)?;
        for sector in Sector::CITY {
            let qty = national.city.get(&sector).copied().unwrap_or(0.0);
            if qty == 0.0 {
                continue;
            }
            let split = match sector {
                Sector::BuildingMaterials => allocate_two_stage(qty, self.proxy("building_materials")?, &gdp_cities)?,
                Sector::Chemicals => allocate_two_stage(qty, self.proxy("chemicals")?, &gdp_cities)?,
                Sector::Heating => {
                    let pop = &self.proxy("population")?.weights;
                    let w = heating_weights(&self.hdd, pop, &self.config.hdd_neighbours)?;
                    allocate_two_stage(qty, &w, &pop_cities)?
                }
                _ => allocate_two_stage(qty, self.proxy("population")?, &pop_cities)?,
            };
            for (c, v) in split {
                *out.other.entry(NodeId::from(c)).or_default() += v;
            }
        }
        diag.national = national;
        Ok((out, diag))
    }

    /// Reads a demand directory: `demand_national.csv`, `power_generation.csv`,
    /// `growth_rates.csv`, `provinces.csv`, `proxies/*.csv` and an optional
    /// `demand.toml`.
    pub fn load(dir: &Path) -> Result<(Self, Vec<String>), DemandError> {
        let mut model = DemandModel::default();
        let mut warnings = Vec::new();
        let config_path = dir.join("demand.toml");
        if config_path.exists() {
            model.config = parse_toml(&config_path)?;
        }

        let path = dir.join("demand_national.csv");
        warnings.extend(read_table(&path, &["sector", "year", "qty", "unit"], &[], |row| {
            let year: Year = row
                .required("year")?
                .parse()
                .map_err(|_| row.err("bad year"))?;
            let qty = row.f64("qty")?;
            let unit = row.get("unit").unwrap_or("").to_ascii_lowercase();
            let sector = row.required("sector")?;
            let bad_unit = || row.err(format!("unit `{unit}` not valid for `{sector}`"));
            match sector {
                "power_industry" => {
                    if unit != "pj" {
                        return Err(bad_unit());
                    }
                    model.power_industry.insert(year, qty);
                }
                "fleet_efficiency" => {
                    let eff = match unit.as_str() {
                        "fraction" | "" => qty,
                        "%" | "percent" => qty / 100.0,
                        _ => return Err(bad_unit()),
                    };
                    model.fleet_efficiency.insert(year, eff);
                }
                other => {
                    let s: Sector = other.parse().map_err(|e: DemandError| row.err(e.to_string()))?;
                    let v = match (s, unit.as_str()) {
                        (Sector::Steel, "mt") => qty,
                        (Sector::PowerGen, "twh") => qty * PJ_PER_TWH,
                        (Sector::Steel, _) => return Err(bad_unit()),
                        (_, "pj") => qty,
                        _ => return Err(bad_unit()),
                    };
                    if !(v >= 0.0) {
                        return Err(row.err("negative demand"));
                    }
                    model.national.insert((s, year), v);
                }
            }
            Ok(())
        })?);

        let path = dir.join("power_generation.csv");
        warnings.extend(read_table(
            &path,
            &["province", "year", "thermal_TWh", "gas_TWh", "biomass_TWh"],
            &[],
            |row| {
                let year: Year = row.required("year")?.parse().map_err(|_| row.err("bad year"))?;
                let p = row.required("province")?.to_string();
                let g = model.generation.entry(year).or_default();
                g.thermal.insert(p.clone(), row.f64("thermal_TWh")?);
                g.gas.insert(p.clone(), row.f64_opt("gas_TWh")?.unwrap_or(0.0));
                g.biomass.insert(p, row.f64_opt("biomass_TWh")?.unwrap_or(0.0));
                Ok(())
            },
        )?);

        let path = dir.join("growth_rates.csv");
        warnings.extend(read_table(&path, &["province", "sector", "rate"], &[], |row| {
            let sector = row.required("sector")?;
            if sector != Sector::PowerGen.as_str() {
                return Err(row.err(format!("growth rates are only used for power_gen, got `{sector}`")));
            }
            model.power_growth.insert(row.required("province")?.to_string(), row.f64("rate")?);
            Ok(())
        })?);

        let path = dir.join("provinces.csv");
        warnings.extend(read_table(&path, &["province", "coastal", "gdp_index"], &[], |row| {
            model.provinces.insert(
                row.required("province")?.to_string(),
                ProvinceInfo {
                    coastal: row.bool_opt("coastal")?.unwrap_or(false),
                    gdp_index: row.f64_opt("gdp_index")?.unwrap_or(1.0),
                },
            );
            Ok(())
        })?);

        let proxy_dir = dir.join("proxies");
        let entries = std::fs::read_dir(&proxy_dir).map_err(|e| IoError::io(&proxy_dir, e))?;
        let mut files: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        for path in files {
            let name = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
            let mut weights = BTreeMap::new();
            let mut hdd = BTreeMap::new();
            warnings.extend(read_table(&path, &["sector", "region", "weight", "neighbour"], &[], |row| {
                let region = row.required("region")?.to_string();
                if name == "hdd" {
                    hdd.insert(region.clone(), row.f64_opt("weight")?);
                    if let Some(n) = row.get("neighbour") {
                        model.config.hdd_neighbours.insert(region, n.to_string());
                    }
                } else {
                    let w = row.f64("weight")?;
                    if !(w >= 0.0) {
                        return Err(row.err("negative proxy weight"));
                    }
                    weights.insert(region, w);
                }
                Ok(())
            })?);
            if name == "hdd" {
                model.hdd = hdd;
            } else if name.starts_with("city_") {
                model.city_proxies.insert(name, weights);
            } else {
                let sector = name.parse::<Sector>().ok();
                model.proxies.insert(name, ProxyTable { sector, weights });
            }
        }
        Ok((model, warnings))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Node;

    fn network() -> Network {
        let nodes = vec![
            Node::new("pd_a", NodeKind::ProvPowerDemand).in_province("A"),
            Node::new("pd_b", NodeKind::ProvPowerDemand).in_province("B"),
            Node::new("sd_a", NodeKind::ProvSteelDemand).in_province("A"),
            Node::new("sd_b", NodeKind::ProvSteelDemand).in_province("B"),
            Node::new("a1", NodeKind::CityCenter).at(30.0, 110.0).in_province("A"),
            Node::new("a2", NodeKind::CityCenter).at(30.5, 110.0).in_province("A"),
            Node::new("b1", NodeKind::CityCenter).at(31.0, 111.0).in_province("B"),
        ];
        Network::from_parts(nodes, vec![], vec![2019, 2025]).unwrap()
    }

    fn model() -> DemandModel {
        let mut m = DemandModel::default();
        for (s, v) in [
            (Sector::PowerGen, 100.0),
            (Sector::Steel, 10.0),
            (Sector::BuildingMaterials, 40.0),
            (Sector::Chemicals, 20.0),
            (Sector::Heating, 30.0),
            (Sector::Other, 60.0),
        ] {
            m.national.insert((s, 2019), v);
        }
        m.power_industry.insert(2019, 250.0);
        m.fleet_efficiency.insert(2019, 0.35);
        let mut g = GenerationTable::default();
        g.thermal.insert("A".into(), 30.0);
        g.thermal.insert("B".into(), 10.0);
        m.generation.insert(2019, g);
        let w = |pairs: &[(&str, f64)]| ProxyTable::new(pairs.iter().map(|(k, v)| (k.to_string(), *v)));
        m.proxies.insert("building_materials".into(), w(&[("A", 1.0), ("B", 1.0)]));
        m.proxies.insert("chemicals".into(), w(&[("A", 3.0), ("B", 1.0)]));
        m.proxies.insert("population".into(), w(&[("A", 2.0), ("B", 2.0)]));
        m.proxies.insert("steel".into(), w(&[("A", 1.0), ("B", 4.0)]));
        m.hdd = BTreeMap::from([("A".into(), Some(2000.0)), ("B".into(), None)]);
        m.config.hdd_neighbours.insert("B".into(), "A".into());
        m.city_proxies.insert(
            "city_gdp".into(),
            BTreeMap::from([("a1".into(), 1.0), ("a2".into(), 1.0), ("b1".into(), 1.0)]),
        );
        m.power_growth = BTreeMap::from([("A".into(), 0.01), ("B".into(), 0.05)]);
        m.provinces = BTreeMap::from([
            ("A".into(), ProvinceInfo { coastal: true, gdp_index: 1.5 }),
            ("B".into(), ProvinceInfo { coastal: false, gdp_index: 0.5 }),
        ]);
        m
    }

    #[test]
    fn base_year_conserves_national_totals() {
        let m = model();
        let (d, diag) = m.demand_for(2019, &network()).unwrap();
        assert!((d.total_elec() - 100.0).abs() < 1e-9);
        assert!((d.elec[&NodeId::from("pd_a")] - 75.0).abs() < 1e-9);
        assert!((d.total_steel() - 10.0).abs() < 1e-9);
        // other reduced by 100/0.35 - 250
        let reduction = 100.0 / 0.35 - 250.0;
        assert!((diag.national.other_reduction.unwrap() - reduction).abs() < 1e-9);
        let city_total = 40.0 + 20.0 + 30.0 + 60.0 - reduction;
        assert!((d.total_other() - city_total).abs() < 1e-9);
    }

    #[test]
    fn preset_and_modes_hit_target() {
        let mut m = model();
        m.trajectory = Trajectory::Preset(DemandPreset::Sds);
        let want = 100.0 * 2001.0 / 2263.0;
        for mode in [PowerMode::HistoricalOffset, PowerMode::Uniform, PowerMode::GdpWeighted] {
            m.power_mode = mode;
            let (d, _) = m.demand_for(2025, &network()).unwrap();
            assert!((d.total_elec() - want).abs() < 1e-6, "{mode:?}");
        }
    }

    #[test]
    fn inland_share_applied() {
        let mut m = model();
        m.steel_shift = Some(SteelShift::InlandShare(0.5));
        let (d, _) = m.demand_for(2019, &network()).unwrap();
        assert!((d.steel[&NodeId::from("sd_a")] - 5.0).abs() < 1e-9);
        assert!((d.steel[&NodeId::from("sd_b")] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn cagr_zero_is_identity() {
        let mut m = model();
        let (base, _) = m.demand_for(2019, &network()).unwrap();
        m.trajectory = Trajectory::Cagr { thermal: 0.0, coking: 0.0 };
        let (later, _) = m.demand_for(2025, &network()).unwrap();
        for (k, v) in &base.elec {
            assert!((later.elec[k] - v).abs() < 1e-9);
        }
    }
}
