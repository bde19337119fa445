//! Constructive rules that synthesize links from installation coordinates.

use super::geo::{geodesic_distance, Coords};
use super::{Link, NetworkError, Node, NodeId, NodeKind, TransportMode};
use crate::years::{Year, YearSeries};
use log::warn;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Geodesically nearest cities kept as road candidates per city.
pub const CITY_CANDIDATES: usize = 12;
/// Road links retained per city, by driving distance.
pub const CITY_LINKS_KEPT: usize = 8;
/// Average driving-to-geodesic ratio used to impute missing driving distances.
pub const DRIVING_TO_GEODESIC: f64 = 1.7;
/// Search radius for railway stops around a plant, km geodesic.
pub const RAIL_SEARCH_RADIUS_KM: f64 = 25.0;
/// Below this geodesic distance a plant sits directly on the rail line.
pub const DIRECT_RAIL_KM: f64 = 5.0;
/// Longest driving distance for a direct truck link to a stop.
pub const TRUCK_LINK_MAX_KM: f64 = 15.0;

const UHV_LOSS_DC_PER_1000KM: f64 = 0.028;
const UHV_LOSS_AC_PER_1000KM: f64 = 0.036;

/// Symmetric table of driving distances, km. Gaps are allowed.
#[derive(Clone, Debug, Default)]
pub struct DrivingTable(BTreeMap<(NodeId, NodeId), f64>);

impl DrivingTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: impl Into<NodeId>, b: impl Into<NodeId>, km: f64) {
        let (a, b) = (a.into(), b.into());
        let key = if a <= b { (a, b) } else { (b, a) };
        self.0.insert(key, km);
    }

    pub fn get(&self, a: &NodeId, b: &NodeId) -> Option<f64> {
        let key = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        self.0.get(&key).copied()
    }

    /// Driving distance, imputed as geodesic x 1.7 where the table has no entry.
    /// Never shorter than the geodesic distance.
    fn driving_or_imputed(&self, a: &Node, b: &Node) -> Result<(f64, f64), NetworkError> {
        let geo = geodesic_distance(coords_of(a)?, coords_of(b)?)?;
        let driving = match self.get(&a.id, &b.id) {
            Some(d) if d >= geo => d,
            Some(d) => {
                warn!("driving distance {} -> {} ({d} km) below geodesic, raised", a.id, b.id);
                geo
            }
            None => geo * DRIVING_TO_GEODESIC,
        };
        Ok((geo, driving))
    }
}

fn coords_of(node: &Node) -> Result<Coords, NetworkError> {
    node.coords.ok_or(NetworkError::InvalidCoords {
        lat: f64::NAN,
        lon: f64::NAN,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum BuildWarning {
    FewCandidates { city: NodeId, available: usize },
}

/// Result of the inter-city road synthesis.
#[derive(Clone, Debug, Default)]
pub struct CityGraph {
    /// Neighbours selected by each city, nearest first.
    pub selections: BTreeMap<NodeId, Vec<NodeId>>,
    /// Deduplicated bidirectional truck links.
    pub links: Vec<Link>,
    pub warnings: Vec<BuildWarning>,
}

/// Road links between cities: the 12 geodesically nearest cities are
/// candidates, of which the 8 nearest by driving distance are kept.
pub fn build_city_graph(cities: &[Node], driving: &DrivingTable) -> Result<CityGraph, NetworkError> {
    let mut graph = CityGraph::default();
    let mut link_index: BTreeMap<(NodeId, NodeId), usize> = BTreeMap::new();

    for city in cities {
        let origin = coords_of(city)?;
        let mut by_geodesic = Vec::with_capacity(cities.len());
        for other in cities.iter().filter(|o| o.id != city.id) {
            by_geodesic.push((geodesic_distance(origin, coords_of(other)?)?, other));
        }
        by_geodesic.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.id.cmp(&b.1.id)));
        by_geodesic.truncate(CITY_CANDIDATES);

        let mut by_driving = Vec::with_capacity(by_geodesic.len());
        for (_, other) in &by_geodesic {
            let (_, km) = driving.driving_or_imputed(city, other)?;
            by_driving.push((km, *other));
        }
        by_driving.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.id.cmp(&b.1.id)));
        if by_driving.len() < CITY_LINKS_KEPT {
            warn!(
                "city {} has only {} road candidates",
                city.id,
                by_driving.len()
            );
            graph.warnings.push(BuildWarning::FewCandidates {
                city: city.id.clone(),
                available: by_driving.len(),
            });
        }
        by_driving.truncate(CITY_LINKS_KEPT);

        let chosen = graph.selections.entry(city.id.clone()).or_default();
        for (km, other) in by_driving {
            chosen.push(other.id.clone());
            let key = if city.id <= other.id {
                (city.id.clone(), other.id.clone())
            } else {
                (other.id.clone(), city.id.clone())
            };
            if let std::collections::btree_map::Entry::Vacant(e) = link_index.entry(key) {
                e.insert(graph.links.len());
                graph
                    .links
                    .push(Link::new(city.id.clone(), other.id.clone(), TransportMode::Truck, km));
            }
        }
    }
    Ok(graph)
}

/// Connects a power or steel plant to nearby railway stops.
///
/// Stops within 25 km geodesic are candidates; only the nearest stop (by
/// driving distance, ties to the smallest id) on each rail line is kept.
/// Under 5 km geodesic the plant sits on the line (zero-length rail link);
/// within 15 km driving it gets a truck link; otherwise nothing.
pub fn attach_plant_to_rail(
    plant: &Node,
    stops: &[Node],
    driving: &DrivingTable,
) -> Result<Vec<Link>, NetworkError> {
    let origin = coords_of(plant)?;
    let mut nearest_per_line: BTreeMap<String, (f64, f64, &Node)> = BTreeMap::new();
    for stop in stops {
        let geo = geodesic_distance(origin, coords_of(stop)?)?;
        if geo > RAIL_SEARCH_RADIUS_KM {
            continue;
        }
        let (_, km) = driving.driving_or_imputed(plant, stop)?;
        let line = stop.rail_line.clone().unwrap_or_else(|| stop.id.0.clone());
        let better = match nearest_per_line.get(&line) {
            None => true,
            Some((best_km, _, best)) => km < *best_km || (km == *best_km && stop.id < best.id),
        };
        if better {
            nearest_per_line.insert(line, (km, geo, stop));
        }
    }

    let mut links = Vec::new();
    for (line, (km, geo, stop)) in nearest_per_line {
        let link = if geo < DIRECT_RAIL_KM {
            Link::new(stop.id.clone(), plant.id.clone(), TransportMode::Rail, 0.0)
        } else if km <= TRUCK_LINK_MAX_KM {
            Link::new(stop.id.clone(), plant.id.clone(), TransportMode::Truck, km)
        } else {
            continue;
        };
        let mut link = link.one_way();
        if stop.rail_line.is_some() {
            link.line = Some(line);
        }
        links.push(link);
    }
    Ok(links)
}

/// National departure point for foreign mines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Departure {
    /// Biggest coal port of the country; distances are geodesic from here.
    Port(Coords),
    /// Fixed navigation distance to every waypoint.
    FixedKm(f64),
}

/// Ocean links from foreign mines to every ocean waypoint. Countries
/// without a configured departure use `default_km` (12,000 km).
pub fn link_foreign_mines(
    mines: &[Node],
    waypoints: &[Node],
    departures: &BTreeMap<String, Departure>,
    default_km: f64,
) -> Result<Vec<Link>, NetworkError> {
    let mut links = Vec::new();
    for mine in mines {
        let departure = departures
            .get(&mine.country)
            .copied()
            .unwrap_or(Departure::FixedKm(default_km));
        for wp in waypoints.iter().filter(|w| w.kind == NodeKind::NavWaypointOcean) {
            let km = match departure {
                Departure::Port(from) => geodesic_distance(from, coords_of(wp)?)?,
                Departure::FixedKm(km) => km,
            };
            links.push(Link::new(mine.id.clone(), wp.id.clone(), TransportMode::OceanShip, km));
        }
    }
    Ok(links)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum UhvType {
    Ac,
    Dc,
}

/// Dominant generation source at the origin of a UHV line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginTag {
    RenewableNuclear,
    Mixed,
    CoalRegion,
    Unspecified,
}

impl std::str::FromStr for OriginTag {
    type Err = NetworkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "renewable" | "nuclear" | "renewable_nuclear" | "renewables" => Ok(OriginTag::RenewableNuclear),
            "mixed" => Ok(OriginTag::Mixed),
            "coal" | "coal_region" => Ok(OriginTag::CoalRegion),
            "unspecified" | "" => Ok(OriginTag::Unspecified),
            other => Err(NetworkError::UnknownEnum {
                what: "UHV origin tag",
                value: other.to_string(),
            }),
        }
    }
}

impl OriginTag {
    /// Share of nameplate capacity attributed to coal-fired generation.
    pub fn coal_share(self) -> f64 {
        match self {
            OriginTag::RenewableNuclear => 0.0,
            OriginTag::Mixed => 0.5,
            OriginTag::CoalRegion | OriginTag::Unspecified => 1.0,
        }
    }
}

/// Raw UHV line record.
#[derive(Clone, Debug, PartialEq)]
pub struct UhvRecord {
    pub from_province: String,
    pub to_province: String,
    pub length_km: f64,
    pub line_type: UhvType,
    pub nameplate_pj: f64,
    pub origin: OriginTag,
    pub start_year: Option<Year>,
}

/// Coal-attributable transmission capacity, PJ/yr.
pub fn uhv_coal_capacity(record: &UhvRecord) -> f64 {
    record.nameplate_pj * record.origin.coal_share()
}

/// Line efficiency; losses are linear in length.
pub fn uhv_line_efficiency(line_type: UhvType, length_km: f64) -> Result<f64, NetworkError> {
    let rate = match line_type {
        UhvType::Dc => UHV_LOSS_DC_PER_1000KM,
        UhvType::Ac => UHV_LOSS_AC_PER_1000KM,
    };
    let eff = 1.0 - rate * length_km / 1000.0;
    if !(length_km >= 0.0) || eff <= 0.0 {
        return Err(NetworkError::BadUhvRecord {
            from: String::new(),
            to: String::new(),
            reason: format!("length {length_km} km gives efficiency {eff}"),
        });
    }
    Ok(eff)
}

/// Builds the UHV link between the provincial power demand nodes of a record.
pub fn uhv_link(
    record: &UhvRecord,
    demand_node_of: &BTreeMap<String, NodeId>,
    first_year: Year,
) -> Result<Link, NetworkError> {
    let bad = |reason: String| NetworkError::BadUhvRecord {
        from: record.from_province.clone(),
        to: record.to_province.clone(),
        reason,
    };
    let from = demand_node_of
        .get(&record.from_province)
        .ok_or_else(|| bad("no power demand node in origin province".into()))?;
    let to = demand_node_of
        .get(&record.to_province)
        .ok_or_else(|| bad("no power demand node in destination province".into()))?;
    let eff = uhv_line_efficiency(record.line_type, record.length_km).map_err(|e| bad(e.to_string()))?;
    let mut elec_capa = YearSeries::new();
    match record.start_year {
        Some(start) if start > first_year => {
            elec_capa.set(first_year, 0.0);
            elec_capa.set(start, uhv_coal_capacity(record));
        }
        _ => elec_capa.set(first_year, uhv_coal_capacity(record)),
    }
    let mut link = Link::new(from.clone(), to.clone(), TransportMode::Uhv, record.length_km).one_way();
    link.elec_capa = elec_capa;
    link.conv_eff = Some(eff);
    Ok(link)
}
