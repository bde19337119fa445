//! Declarative scenario files and their application to a bundle.

use super::{scale_from, Bundle, ScenarioError};
use crate::demand::{DemandPreset, PowerMode, SteelShift, Trajectory};
use crate::network::{Network, NodeId, NodeKind, TransportMode};
use crate::supply::CokingMode;
use crate::years::{Year, YearSeries};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Provinces whose landlocked steel capacity moves to ports by default.
pub const STEEL_PORT_PROVINCES: [&str; 5] = ["HE", "JS", "LN", "SD", "GD"];

/// Asset classes an infrastructure counterfactual can hold back.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfraKind {
    /// Rail links inside China, Haoji included.
    Rail,
    Haoji,
    Uhv,
    /// Rail links with an end in Mongolia.
    MongoliaRail,
    Ports,
    /// All of the above.
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSector {
    Thermal,
    Coking,
}

fn default_freeze_year() -> Year {
    2015
}

fn default_inland_share() -> f64 {
    0.5
}

fn default_port_fraction() -> f64 {
    0.25
}

fn default_port_provinces() -> Vec<String> {
    STEEL_PORT_PROVINCES.iter().map(|s| s.to_string()).collect()
}

/// One scenario change. Mutations are applied in the order listed; only
/// mutations touching disjoint parts of the bundle commute (e.g. a freeze
/// and a premium mode), while two demand settings overwrite each other.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Mutation {
    /// Caps capacities after `to_year` at their `to_year` value.
    FreezeInfra {
        kind: InfraKind,
        #[serde(default = "default_freeze_year")]
        to_year: Year,
    },
    /// Applies the rows of expansion table `table` for mines of `country`.
    ExpandMines { country: String, table: String },
    SetCokingPremiumMode { mode: CokingMode },
    /// Inland provinces take `inland_share` of national steel demand.
    SteelSplit {
        #[serde(default = "default_inland_share")]
        inland_share: f64,
    },
    /// Moves `fraction` of landlocked steel capacity onto port-located
    /// plants of the same province.
    SteelToPorts {
        #[serde(default = "default_port_provinces")]
        provinces: Vec<String>,
        #[serde(default = "default_port_fraction")]
        fraction: f64,
    },
    PowerReduction { mode: PowerMode },
    DemandPreset { preset: DemandPreset },
    /// Compound growth for one sector; the other keeps its current rate
    /// (zero unless set before).
    CagrOverride { sector: SweepSector, rate: f64 },
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mutation::FreezeInfra { kind, to_year } => write!(f, "freeze_infra({kind:?}, {to_year})"),
            Mutation::ExpandMines { country, table } => write!(f, "expand_mines({country}, {table})"),
            Mutation::SetCokingPremiumMode { mode } => write!(f, "set_coking_premium_mode({mode:?})"),
            Mutation::SteelSplit { inland_share } => write!(f, "steel_split({inland_share})"),
            Mutation::SteelToPorts { provinces, fraction } => {
                write!(f, "steel_to_ports([{}], {fraction})", provinces.join(" "))
            }
            Mutation::PowerReduction { mode } => write!(f, "power_reduction({mode:?})"),
            Mutation::DemandPreset { preset } => write!(f, "demand_preset({preset:?})"),
            Mutation::CagrOverride { sector, rate } => write!(f, "cagr_override({sector:?}, {rate})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub mutations: Vec<Mutation>,
}

impl ScenarioSpec {
    pub fn baseline() -> Self {
        Self {
            name: "baseline".into(),
            description: String::new(),
            mutations: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Spec(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    /// Same scenario with `m` appended.
    pub fn with(mut self, m: Mutation) -> Self {
        self.mutations.push(m);
        self
    }
}

const PRESETS: [(&str, &str); 14] = [
    ("baseline", include_str!("../../scenario/baseline.toml")),
    ("australia_expansion", include_str!("../../scenario/australia_expansion.toml")),
    ("mongolia_expansion", include_str!("../../scenario/mongolia_expansion.toml")),
    ("linear_coking_premia", include_str!("../../scenario/linear_coking_premia.toml")),
    ("steel_inland", include_str!("../../scenario/steel_inland.toml")),
    ("steel_to_ports", include_str!("../../scenario/steel_to_ports.toml")),
    ("power_equal_reduction", include_str!("../../scenario/power_equal_reduction.toml")),
    ("power_gdp_weighted", include_str!("../../scenario/power_gdp_weighted.toml")),
    ("no_rail_expansion", include_str!("../../scenario/no_rail_expansion.toml")),
    ("no_haoji", include_str!("../../scenario/no_haoji.toml")),
    ("no_uhv", include_str!("../../scenario/no_uhv.toml")),
    ("no_mongolia_rail", include_str!("../../scenario/no_mongolia_rail.toml")),
    ("no_port_expansion", include_str!("../../scenario/no_port_expansion.toml")),
    ("no_infra_expansion", include_str!("../../scenario/no_infra_expansion.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// A bundled scenario by name.
pub fn preset(name: &str) -> Result<ScenarioSpec, ScenarioError> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ScenarioError::UnknownScenario(name.to_string()))?;
    ScenarioSpec::from_toml(text)
}

fn absent(m: &Mutation, assets: Vec<String>) -> ScenarioError {
    ScenarioError::AbsentAssets {
        mutation: m.to_string(),
        assets,
    }
}

fn is_rail(network: &Network, idx: usize, country: Option<&str>) -> bool {
    let l = &network.links[idx];
    if l.mode != TransportMode::Rail {
        return false;
    }
    let countries = [&l.from, &l.to].map(|id| network.node(id).map(|n| n.country.as_str()));
    match country {
        Some(c) => countries.contains(&Some(c)),
        None => countries.iter().all(|x| *x == Some(crate::supply::DOMESTIC)),
    }
}

/// Indices of links and port nodes covered by a freeze.
fn freeze_targets(bundle: &Bundle, kind: InfraKind) -> (Vec<usize>, Vec<NodeId>) {
    let net = &bundle.network;
    let links: Vec<usize> = (0..net.links.len())
        .filter(|&i| {
            let l = &net.links[i];
            match kind {
                InfraKind::Rail => is_rail(net, i, None),
                InfraKind::Haoji => {
                    l.mode == TransportMode::Rail && l.line.as_deref().is_some_and(|n| n.eq_ignore_ascii_case("haoji"))
                }
                InfraKind::Uhv => l.mode == TransportMode::Uhv,
                InfraKind::MongoliaRail => is_rail(net, i, Some("MN")),
                InfraKind::Ports => false,
                InfraKind::All => l.mode == TransportMode::Rail || l.mode == TransportMode::Uhv,
            }
        })
        .collect();
    let ports = if matches!(kind, InfraKind::Ports | InfraKind::All) {
        if bundle.settings.key_ports.is_empty() {
            net.nodes_of_kind(NodeKind::Port).map(|n| n.id.clone()).collect()
        } else {
            bundle.settings.key_ports.clone()
        }
    } else {
        Vec::new()
    };
    (links, ports)
}

fn freeze(bundle: &mut Bundle, m: &Mutation, kind: InfraKind, to_year: Year) -> Result<(), ScenarioError> {
    let (links, ports) = freeze_targets(bundle, kind);
    let empty_ports = matches!(kind, InfraKind::Ports) && ports.is_empty();
    if (links.is_empty() && !matches!(kind, InfraKind::Ports)) || empty_ports {
        return Err(absent(m, vec![format!("{kind:?} assets")]));
    }
    let missing: Vec<String> = ports
        .iter()
        .filter(|p| bundle.network.kind_of(p) != Some(NodeKind::Port))
        .map(|p| p.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(absent(m, missing));
    }
    for i in links {
        let l = &mut bundle.network.links[i];
        if l.mode == TransportMode::Uhv {
            l.elec_capa.cap_after(to_year);
        } else {
            l.transp_capa.cap_after(to_year);
        }
    }
    for p in ports {
        if let Some(n) = bundle.network.nodes.get_mut(&p) {
            n.port_capa.cap_after(to_year);
        }
    }
    Ok(())
}

fn expand_mines(bundle: &mut Bundle, m: &Mutation, country: &str, table: &str) -> Result<(), ScenarioError> {
    let rows = bundle
        .expansions
        .get(table)
        .ok_or_else(|| absent(m, vec![format!("expansion table `{table}`")]))?;
    let rows: Vec<_> = rows.iter().filter(|r| r.country.eq_ignore_ascii_case(country)).cloned().collect();
    if rows.is_empty() {
        return Err(absent(m, vec![format!("{country} rows in `{table}`")]));
    }
    let missing: Vec<String> = rows
        .iter()
        .filter(|r| bundle.supply.by_mine(&r.mine_id).next().is_none())
        .map(|r| r.mine_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(absent(m, missing));
    }
    for row in rows {
        let y = row.from_year;
        let idx: Vec<usize> = (0..bundle.supply.steps.len())
            .filter(|&i| bundle.supply.steps[i].mine_id == row.mine_id)
            .collect();
        let factor = |i: usize| {
            let s = &bundle.supply.steps[i];
            bundle.correction.as_ref().map_or(1.0, |c| c.factor(&s.country, s.coal_type))
        };
        let current: Vec<f64> = idx.iter().map(|&i| bundle.supply.steps[i].capacity(y)).collect();
        let sum: f64 = current.iter().sum();
        // Shares of the mine's current capacity, equal when it has none yet.
        let share = |k: usize| {
            if sum > 0.0 {
                current[k] / sum
            } else {
                1.0 / idx.len() as f64
            }
        };
        let factors: Vec<f64> = idx.iter().map(|&i| factor(i)).collect();
        for (k, &i) in idx.iter().enumerate() {
            let step = &mut bundle.supply.steps[i];
            let target = match (row.total, row.added) {
                (Some(total), _) => total * share(k) * factors[k],
                (None, Some(added)) => current[k] + added * share(k) * factors[k],
                (None, None) => current[k],
            };
            if current[k] > 0.0 {
                scale_from(&mut step.prod_capa, y, target / current[k]);
            } else {
                step.prod_capa.set_from(y, target);
            }
            if let Some(cost) = row.cost {
                step.prod_cost.set_from(y, cost);
            }
        }
    }
    Ok(())
}

fn steel_to_ports(bundle: &mut Bundle, m: &Mutation, provinces: &[String], fraction: f64) -> Result<(), ScenarioError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(ScenarioError::Spec(format!("{m}: fraction outside [0, 1]")));
    }
    let net = &bundle.network;
    let mut plan: Vec<(Vec<NodeId>, Vec<NodeId>)> = Vec::new();
    let mut missing = Vec::new();
    for p in provinces {
        let plants: Vec<&NodeId> = net
            .nodes_of_kind(NodeKind::SteelPlant)
            .filter(|n| &n.province == p)
            .map(|n| &n.id)
            .collect();
        let (port, land): (Vec<&NodeId>, Vec<&NodeId>) = plants.into_iter().partition(|id| net.is_port_located(id));
        if port.is_empty() {
            missing.push(format!("port-located steel plant in {p}"));
        }
        if land.is_empty() {
            missing.push(format!("landlocked steel plant in {p}"));
        }
        plan.push((port.into_iter().cloned().collect(), land.into_iter().cloned().collect()));
    }
    if !missing.is_empty() {
        return Err(absent(m, missing));
    }
    for (port, land) in plan {
        let series = |ids: &[NodeId], net: &Network| -> Vec<YearSeries> {
            ids.iter().map(|id| net.nodes[id].stpt_capa.clone()).collect()
        };
        let port_s = series(&port, &bundle.network);
        let land_s = series(&land, &bundle.network);
        let years: BTreeSet<Year> = port_s.iter().chain(&land_s).flat_map(|s| s.iter().map(|(y, _)| y)).collect();
        let mut new_port: Vec<BTreeMap<Year, f64>> = vec![BTreeMap::new(); port.len()];
        let mut new_land: Vec<BTreeMap<Year, f64>> = vec![BTreeMap::new(); land.len()];
        for &y in &years {
            let at = |s: &YearSeries| s.at(y).unwrap_or(0.0);
            let moved: f64 = land_s.iter().map(|s| at(s) * fraction).sum();
            for (k, s) in land_s.iter().enumerate() {
                new_land[k].insert(y, at(s) - at(s) * fraction);
            }
            let port_total: f64 = port_s.iter().map(at).sum();
            for (k, s) in port_s.iter().enumerate() {
                let share = if port_total > 0.0 {
                    at(s) / port_total
                } else {
                    1.0 / port.len() as f64
                };
                new_port[k].insert(y, at(s) + moved * share);
            }
        }
        for (ids, values, old) in [(&port, new_port, &port_s), (&land, new_land, &land_s)] {
            for ((id, v), o) in ids.iter().zip(values).zip(old) {
                if o.is_empty() && v.values().all(|x| *x == 0.0) {
                    continue;
                }
                bundle.network.nodes.get_mut(id).expect("plant exists").stpt_capa = v.into_iter().collect();
            }
        }
    }
    Ok(())
}

fn steel_split(bundle: &mut Bundle, m: &Mutation, share: f64) -> Result<(), ScenarioError> {
    if !(0.0..=1.0).contains(&share) {
        return Err(ScenarioError::Spec(format!("{m}: share outside [0, 1]")));
    }
    let inland: BTreeSet<&String> = bundle
        .demand
        .provinces
        .iter()
        .filter(|(_, i)| !i.coastal)
        .map(|(p, _)| p)
        .collect();
    let has_plant = bundle
        .network
        .nodes_of_kind(NodeKind::SteelPlant)
        .any(|n| inland.contains(&n.province));
    if !has_plant {
        return Err(absent(m, vec!["steel plant in an inland province".into()]));
    }
    bundle.demand.steel_shift = Some(SteelShift::InlandShare(share));
    Ok(())
}

/// Applies `spec` to a copy of `baseline`. The baseline is not touched; an
/// empty mutation list returns an identical bundle.
pub fn apply_scenario(baseline: &Bundle, spec: &ScenarioSpec) -> Result<Bundle, ScenarioError> {
    let mut b = baseline.clone();
    for m in &spec.mutations {
        match m {
            Mutation::FreezeInfra { kind, to_year } => freeze(&mut b, m, *kind, *to_year)?,
            Mutation::ExpandMines { country, table } => expand_mines(&mut b, m, country, table)?,
            Mutation::SetCokingPremiumMode { mode } => b.premia.coking_mode = *mode,
            Mutation::SteelSplit { inland_share } => steel_split(&mut b, m, *inland_share)?,
            Mutation::SteelToPorts { provinces, fraction } => steel_to_ports(&mut b, m, provinces, *fraction)?,
            Mutation::PowerReduction { mode } => b.demand.power_mode = *mode,
            Mutation::DemandPreset { preset } => b.demand.trajectory = Trajectory::Preset(*preset),
            Mutation::CagrOverride { sector, rate } => {
                let (mut thermal, mut coking) = match b.demand.trajectory {
                    Trajectory::Cagr { thermal, coking } => (thermal, coking),
                    _ => (0.0, 0.0),
                };
                match sector {
                    SweepSector::Thermal => thermal = *rate,
                    SweepSector::Coking => coking = *rate,
                }
                b.demand.trajectory = Trajectory::Cagr { thermal, coking };
            }
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        let names: Vec<&str> = preset_names().collect();
        assert_eq!(names.len(), 14);
        for n in names {
            let spec = preset(n).unwrap();
            assert_eq!(spec.name, n);
        }
        assert!(preset("moon_base").is_err());
        assert!(preset("baseline").unwrap().mutations.is_empty());
    }

    #[test]
    fn toml_round_trip() {
        let spec = ScenarioSpec::baseline()
            .with(Mutation::FreezeInfra {
                kind: InfraKind::Haoji,
                to_year: 2015,
            })
            .with(Mutation::SteelToPorts {
                provinces: vec!["JS".into()],
                fraction: 0.25,
            })
            .with(Mutation::CagrOverride {
                sector: SweepSector::Coking,
                rate: -0.01,
            });
        let back = ScenarioSpec::from_toml(&spec.to_toml()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn defaults_fill_in() {
        let spec = ScenarioSpec::from_toml(
            "name = \"x\"\n[[mutations]]\ntype = \"freeze_infra\"\nkind = \"rail\"\n\
             [[mutations]]\ntype = \"steel_to_ports\"\n[[mutations]]\ntype = \"steel_split\"\n",
        )
        .unwrap();
        assert_eq!(
            spec.mutations[0],
            Mutation::FreezeInfra {
                kind: InfraKind::Rail,
                to_year: 2015
            }
        );
        assert_eq!(
            spec.mutations[1],
            Mutation::SteelToPorts {
                provinces: default_port_provinces(),
                fraction: 0.25
            }
        );
        assert_eq!(spec.mutations[2], Mutation::SteelSplit { inland_share: 0.5 });
        assert!(ScenarioSpec::from_toml("name = \"x\"\n[[mutations]]\ntype = \"teleport\"\n").is_err());
    }
}
