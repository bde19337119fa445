//! Origin aggregation, long-format report tables and per-run output files.

use crate::network::{Network, NodeId, NodeKind, TransportMode};
use crate::optimizer::{check_solution, FlowProblem, FlowSolution, VarKey};
use crate::supply::{CoalType, SupplyBook, DOMESTIC};
use crate::years::Year;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

/// Origin countries reported separately; everything else is `RestOfWorld`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Origin {
    China,
    Australia,
    Indonesia,
    Russia,
    Mongolia,
    Canada,
    Philippines,
    RestOfWorld,
}

impl Origin {
    pub const ALL: [Origin; 8] = [
        Origin::China,
        Origin::Australia,
        Origin::Indonesia,
        Origin::Russia,
        Origin::Mongolia,
        Origin::Canada,
        Origin::Philippines,
        Origin::RestOfWorld,
    ];

    pub fn from_country(code: &str) -> Origin {
        match code.trim().to_ascii_uppercase().as_str() {
            "CN" => Origin::China,
            "AU" => Origin::Australia,
            "ID" => Origin::Indonesia,
            "RU" => Origin::Russia,
            "MN" => Origin::Mongolia,
            "CA" => Origin::Canada,
            "PH" => Origin::Philippines,
            _ => Origin::RestOfWorld,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Origin::China => "China",
            Origin::Australia => "Australia",
            Origin::Indonesia => "Indonesia",
            Origin::Russia => "Russia",
            Origin::Mongolia => "Mongolia",
            Origin::Canada => "Canada",
            Origin::Philippines => "Philippines",
            Origin::RestOfWorld => "RestOfWorld",
        }
    }

    pub fn is_import(self) -> bool {
        self != Origin::China
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Origin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        Origin::ALL
            .into_iter()
            .find(|o| o.as_str().eq_ignore_ascii_case(t))
            .or_else(|| (t.len() == 2).then(|| Origin::from_country(t)))
            .ok_or_else(|| format!("unknown origin `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Domestic,
    Seaborne,
    Overland,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Domestic => "domestic",
            Route::Seaborne => "seaborne",
            Route::Overland => "overland",
        }
    }
}

/// How coal from a mine node enters China. Foreign mines with a link to a
/// port, an ocean waypoint or a vessel link ship by sea; the rest (rail or
/// truck across a land border) are overland.
pub fn route_of(network: &Network, mine: &NodeId, country: &str) -> Route {
    if country == DOMESTIC {
        return Route::Domestic;
    }
    let by_sea = network.links.iter().any(|l| {
        let other = if &l.from == mine {
            &l.to
        } else if &l.to == mine {
            &l.from
        } else {
            return false;
        };
        l.mode == TransportMode::OceanShip
            || matches!(network.kind_of(other), Some(NodeKind::Port | NodeKind::NavWaypointOcean))
    });
    if by_sea {
        Route::Seaborne
    } else {
        Route::Overland
    }
}

/// Supply of one origin along one route, Mt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OriginSupply {
    pub origin: Origin,
    pub route: Route,
    pub thermal: f64,
    pub coking: f64,
}

impl OriginSupply {
    pub fn total(&self) -> f64 {
        self.thermal + self.coking
    }
}

/// Every origin-route present in the supply book, with zero rows for those
/// the solution does not use. Sorted by origin, then route.
pub fn origin_groups(network: &Network, supply: &SupplyBook) -> BTreeMap<(Origin, Route), OriginSupply> {
    let mut out = BTreeMap::new();
    for step in &supply.steps {
        let origin = Origin::from_country(&step.country);
        let route = route_of(network, &step.node, &step.country);
        out.entry((origin, route)).or_insert(OriginSupply {
            origin,
            route,
            thermal: 0.0,
            coking: 0.0,
        });
    }
    out
}

/// Sums supply variables of `solution` by origin country and route.
pub fn aggregate_by_origin(
    problem: &FlowProblem,
    solution: &FlowSolution,
    supply: &SupplyBook,
    network: &Network,
) -> Vec<OriginSupply> {
    let mut groups = origin_groups(network, supply);
    if solution.values.len() == problem.vars.len() {
        for (key, v) in problem.vars.iter().zip(&solution.values) {
            let VarKey::Supply { node, coal, bin, .. } = key else {
                continue;
            };
            let Some(step) = supply.step_for(node, *coal, *bin) else {
                continue;
            };
            let origin = Origin::from_country(&step.country);
            let route = route_of(network, node, &step.country);
            let g = groups.get_mut(&(origin, route)).expect("group exists for every step");
            if coal.is_coking() {
                g.coking += v;
            } else {
                g.thermal += v;
            }
        }
    }
    groups.into_values().collect()
}

/// Coal consumed at demand nodes, Mt: net inflow at city, power demand and
/// steel demand nodes.
pub fn consumed_mass(problem: &FlowProblem, solution: &FlowSolution) -> f64 {
    let report = check_solution(problem, solution);
    report
        .node_mass
        .iter()
        .filter(|((node, _, _), _)| {
            matches!(
                problem.context.kinds.get(node),
                Some(NodeKind::CityCenter | NodeKind::ProvPowerDemand | NodeKind::ProvSteelDemand)
            )
        })
        .map(|(_, v)| v)
        .sum()
}

/// One long-format report row. `route` is empty for rows that are not
/// split by route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub scenario: String,
    pub year: Year,
    pub origin: String,
    pub route: String,
    pub metric: String,
    pub value: f64,
    pub unit: String,
}

/// Long-format table; the only report format.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
}

impl ReportTable {
    /// Adds a row. Non-finite values are dropped and counted in the return.
    #[allow(clippy::too_many_arguments)]
    pub fn push(
        &mut self,
        scenario: &str,
        year: Year,
        origin: &str,
        route: &str,
        metric: &str,
        value: f64,
        unit: &str,
    ) -> bool {
        if !value.is_finite() {
            log::warn!("{scenario} {year} {origin} {metric}: non-finite value dropped");
            return false;
        }
        self.rows.push(ReportRow {
            scenario: scenario.to_string(),
            year,
            origin: origin.to_string(),
            route: route.to_string(),
            metric: metric.to_string(),
            value,
            unit: unit.to_string(),
        });
        true
    }

    pub fn extend(&mut self, other: ReportTable) {
        self.rows.extend(other.rows);
    }

    /// Rows sorted by scenario, year, origin, route and metric.
    pub fn sorted(&self) -> Vec<&ReportRow> {
        let mut rows: Vec<&ReportRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            (&a.scenario, a.year, &a.origin, &a.route, &a.metric).cmp(&(&b.scenario, b.year, &b.origin, &b.route, &b.metric))
        });
        rows
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(["scenario", "year", "origin", "route", "metric", "value", "unit"]);
        for r in self.sorted() {
            let _ = w.write_record([
                r.scenario.as_str(),
                &r.year.to_string(),
                &r.origin,
                &r.route,
                &r.metric,
                &format_value(r.value),
                &r.unit,
            ]);
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }
}

/// Shortest round-trip text, with negative zero and sub-1e-12 noise
/// printed as `0`.
pub fn format_value(v: f64) -> String {
    if v.abs() < 1e-12 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// Supply rows of one run: thermal and coking Mt per origin-route.
pub fn origin_table(scenario: &str, year: Year, supply: &[OriginSupply]) -> ReportTable {
    let mut t = ReportTable::default();
    for s in supply {
        t.push(scenario, year, s.origin.as_str(), s.route.as_str(), "thermal_supply", s.thermal, "Mt");
        t.push(scenario, year, s.origin.as_str(), s.route.as_str(), "coking_supply", s.coking, "Mt");
    }
    t
}

/// `imports_by_origin.csv`: one row per origin-route in the supply book.
pub fn imports_csv(scenario: &str, year: Year, supply: &[OriginSupply]) -> String {
    let mut out = String::from("scenario,year,origin,route,thermal_Mt,coking_Mt,total_Mt\n");
    for s in supply {
        let _ = writeln!(
            out,
            "{scenario},{year},{},{},{},{},{}",
            s.origin,
            s.route.as_str(),
            format_value(s.thermal),
            format_value(s.coking),
            format_value(s.total())
        );
    }
    out
}

/// `flows.csv`: every supply and flow variable with a value above 1e-9 Mt,
/// in variable order.
pub fn flows_csv(problem: &FlowProblem, solution: &FlowSolution) -> String {
    let mut out = String::from("kind,from,to,mode,coal,cv,value_Mt\n");
    if solution.values.len() != problem.vars.len() {
        return out;
    }
    for (key, v) in problem.vars.iter().zip(&solution.values) {
        if v.abs() <= 1e-9 {
            continue;
        }
        match key {
            VarKey::Supply { node, coal, bin, .. } => {
                let _ = writeln!(out, "supply,{node},,,{coal},{},{}", bin.kcal(), format_value(*v));
            }
            VarKey::Flow {
                from, to, mode, coal, bin, ..
            } => {
                let _ = writeln!(out, "flow,{from},{to},{mode},{coal},{},{}", bin.kcal(), format_value(*v));
            }
        }
    }
    out
}

/// Total thermal and coking supply in `supply`, Mt.
pub fn totals(supply: &[OriginSupply]) -> (f64, f64) {
    supply.iter().fold((0.0, 0.0), |(t, c), s| (t + s.thermal, c + s.coking))
}

pub fn coal_family(c: CoalType) -> &'static str {
    if c.is_coking() {
        "coking"
    } else {
        "thermal"
    }
}

pub fn write_file(dir: &Path, name: &str, body: &str) -> Result<(), crate::io::IoError> {
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| crate::io::IoError::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::optimizer::{solve, Backend};

    #[test]
    fn country_codes_map_to_origins() {
        assert_eq!(Origin::from_country("AU"), Origin::Australia);
        assert_eq!(Origin::from_country("ZA"), Origin::RestOfWorld);
        assert_eq!("mongolia".parse::<Origin>().unwrap(), Origin::Mongolia);
        assert_eq!("MN".parse::<Origin>().unwrap(), Origin::Mongolia);
        assert!("atlantis".parse::<Origin>().is_err());
    }

    #[test]
    fn all_domestic_single_china_row() {
        let f = fixtures::single_path(10.0, 50.0, 10.0, 5.0);
        let p = f.formulate().unwrap();
        let s = solve(&p, &Backend::Embedded);
        let agg = aggregate_by_origin(&p, &s, &f.supply, &f.network);
        assert_eq!(agg.len(), 1);
        assert_eq!((agg[0].origin, agg[0].route), (Origin::China, Route::Domestic));
        assert!((agg[0].thermal - consumed_mass(&p, &s)).abs() < 1e-6);
    }

    #[test]
    fn canonical_origins_cross_foot() {
        let f = fixtures::canonical();
        let p = f.formulate().unwrap();
        let s = solve(&p, &Backend::Embedded);
        let agg = aggregate_by_origin(&p, &s, &f.supply, &f.network);
        let au = agg.iter().find(|a| a.origin == Origin::Australia).unwrap();
        assert_eq!(au.route, Route::Seaborne);
        let total: f64 = agg.iter().map(OriginSupply::total).sum();
        let consumed = consumed_mass(&p, &s);
        assert!((total - consumed).abs() <= 1e-6 * consumed.max(1.0), "{total} vs {consumed}");
    }

    #[test]
    fn table_drops_nan_and_sorts() {
        let mut t = ReportTable::default();
        assert!(t.push("b", 2025, "China", "", "x", 1.0, "Mt"));
        assert!(t.push("a", 2025, "China", "", "x", 2.0, "Mt"));
        assert!(!t.push("a", 2025, "China", "", "y", f64::NAN, "Mt"));
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("a,"));
        assert!(!csv.contains("NaN"));
    }
}
