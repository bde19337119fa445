//! Node-and-link transport system: domain types, link synthesis rules and
//! invariant checks.

mod build;
mod geo;
pub mod io;
mod validate;

pub use build::{
    attach_plant_to_rail, build_city_graph, link_foreign_mines, uhv_coal_capacity, uhv_link,
    uhv_line_efficiency, BuildWarning, CityGraph, Departure, DrivingTable, OriginTag, UhvRecord,
    UhvType, CITY_CANDIDATES, CITY_LINKS_KEPT, DIRECT_RAIL_KM, DRIVING_TO_GEODESIC,
    RAIL_SEARCH_RADIUS_KM, TRUCK_LINK_MAX_KM,
};
pub use geo::{geodesic_distance, river_distance, Coords, EARTH_RADIUS_KM, RIVER_SINUOSITY};
pub use validate::{validate, ValidationReport, Violation};

use crate::years::{Year, YearSeries};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

/// Errors raised while assembling a network.
#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(NodeId),
    #[error("duplicate link {from} -> {to} ({mode})")]
    DuplicateLink {
        from: NodeId,
        to: NodeId,
        mode: TransportMode,
    },
    #[error("invalid coordinates ({lat}, {lon})")]
    InvalidCoords { lat: f64, lon: f64 },
    #[error("unknown {what} `{value}`")]
    UnknownEnum { what: &'static str, value: String },
    #[error("UHV record {from} -> {to}: {reason}")]
    BadUhvRecord {
        from: String,
        to: String,
        reason: String,
    },
    #[error(transparent)]
    Io(#[from] crate::io::IoError),
}

/// Opaque node identifier.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        Self(s)
    }
}

/// The twelve node kinds of the transport system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Mine,
    Basin,
    RailwayStop,
    CityCenter,
    Port,
    NavWaypointRiver,
    NavWaypointOcean,
    PowerPlant,
    PowerPlantUnit,
    SteelPlant,
    ProvPowerDemand,
    ProvSteelDemand,
}

impl NodeKind {
    pub const ALL: [NodeKind; 12] = [
        NodeKind::Mine,
        NodeKind::Basin,
        NodeKind::RailwayStop,
        NodeKind::CityCenter,
        NodeKind::Port,
        NodeKind::NavWaypointRiver,
        NodeKind::NavWaypointOcean,
        NodeKind::PowerPlant,
        NodeKind::PowerPlantUnit,
        NodeKind::SteelPlant,
        NodeKind::ProvPowerDemand,
        NodeKind::ProvSteelDemand,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Mine => "mine",
            NodeKind::Basin => "basin",
            NodeKind::RailwayStop => "railway_stop",
            NodeKind::CityCenter => "city_center",
            NodeKind::Port => "port",
            NodeKind::NavWaypointRiver => "nav_waypoint_river",
            NodeKind::NavWaypointOcean => "nav_waypoint_ocean",
            NodeKind::PowerPlant => "power_plant",
            NodeKind::PowerPlantUnit => "power_plant_unit",
            NodeKind::SteelPlant => "steel_plant",
            NodeKind::ProvPowerDemand => "prov_power_demand",
            NodeKind::ProvSteelDemand => "prov_steel_demand",
        }
    }

    /// Kinds that must carry coordinates. Units and provincial demand
    /// centres are fictive locations.
    pub fn is_geographic(self) -> bool {
        !matches!(
            self,
            NodeKind::PowerPlantUnit | NodeKind::ProvPowerDemand | NodeKind::ProvSteelDemand
        )
    }

    pub fn is_plant(self) -> bool {
        matches!(
            self,
            NodeKind::PowerPlant | NodeKind::PowerPlantUnit | NodeKind::SteelPlant
        )
    }

    pub fn is_provincial_demand(self) -> bool {
        matches!(self, NodeKind::ProvPowerDemand | NodeKind::ProvSteelDemand)
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for NodeKind {
    type Err = NetworkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim())
            .ok_or_else(|| NetworkError::UnknownEnum {
                what: "node kind",
                value: s.to_string(),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportMode {
    Rail,
    Truck,
    RiverBarge,
    OceanShip,
    Uhv,
    Functional,
}

impl TransportMode {
    pub const ALL: [TransportMode; 6] = [
        TransportMode::Rail,
        TransportMode::Truck,
        TransportMode::RiverBarge,
        TransportMode::OceanShip,
        TransportMode::Uhv,
        TransportMode::Functional,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TransportMode::Rail => "rail",
            TransportMode::Truck => "truck",
            TransportMode::RiverBarge => "river_barge",
            TransportMode::OceanShip => "ocean_ship",
            TransportMode::Uhv => "uhv",
            TransportMode::Functional => "functional",
        }
    }

    /// Modes that move physical coal and pay a per-km tariff.
    pub fn carries_coal(self) -> bool {
        !matches!(self, TransportMode::Uhv | TransportMode::Functional)
    }
}

impl fmt::Display for TransportMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TransportMode {
    type Err = NetworkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TransportMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| NetworkError::UnknownEnum {
                what: "transport mode",
                value: s.to_string(),
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub coords: Option<Coords>,
    pub province: String,
    pub country: String,
    /// Port handling capacity, Mt/yr (ports only).
    #[serde(default)]
    pub port_capa: YearSeries,
    /// Electrical conversion efficiency (power plant units).
    pub conv_eff: Option<f64>,
    /// Crude steel capacity, Mt/yr (steel plants only).
    #[serde(default)]
    pub stpt_capa: YearSeries,
    /// Rail line a railway stop belongs to.
    pub rail_line: Option<String>,
    /// River waypoints only: reachable by ocean-going vessels.
    pub ocean_navigable: Option<bool>,
}

impl Node {
    pub fn new(id: impl Into<NodeId>, kind: NodeKind) -> Self {
        Self {
            id: id.into(),
            kind,
            coords: None,
            province: String::new(),
            country: "CN".to_string(),
            port_capa: YearSeries::new(),
            conv_eff: None,
            stpt_capa: YearSeries::new(),
            rail_line: None,
            ocean_navigable: None,
        }
    }

    pub fn at(mut self, lat: f64, lon: f64) -> Self {
        self.coords = Some(Coords { lat, lon });
        self
    }

    pub fn in_province(mut self, province: &str) -> Self {
        self.province = province.to_string();
        self
    }

    pub fn in_country(mut self, country: &str) -> Self {
        self.country = country.to_string();
        self
    }

    pub fn on_line(mut self, line: &str) -> Self {
        self.rail_line = Some(line.to_string());
        self
    }

    pub fn with_conv_eff(mut self, eff: f64) -> Self {
        self.conv_eff = Some(eff);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    pub mode: TransportMode,
    pub distance_km: f64,
    /// Coal transport capacity, Mt/yr; empty means unbounded.
    #[serde(default)]
    pub transp_capa: YearSeries,
    /// Electrical capacity, PJ/yr (UHV and unit-to-demand links).
    #[serde(default)]
    pub elec_capa: YearSeries,
    /// Line efficiency for UHV links.
    pub conv_eff: Option<f64>,
    pub bidirectional: bool,
    /// Named rail line, used for tariff overrides and scenario selection.
    pub line: Option<String>,
}

impl Link {
    pub fn new(from: impl Into<NodeId>, to: impl Into<NodeId>, mode: TransportMode, km: f64) -> Self {
        Self {
            from: from.into(),
            to: to.into(),
            mode,
            distance_km: km,
            transp_capa: YearSeries::new(),
            elec_capa: YearSeries::new(),
            conv_eff: None,
            bidirectional: true,
            line: None,
        }
    }

    pub fn one_way(mut self) -> Self {
        self.bidirectional = false;
        self
    }

    pub fn with_capacity(mut self, year: Year, mt: f64) -> Self {
        self.transp_capa.set(year, mt);
        self
    }

    pub fn on_line(mut self, line: &str) -> Self {
        self.line = Some(line.to_string());
        self
    }

    pub fn key(&self) -> (&NodeId, &NodeId, TransportMode) {
        (&self.from, &self.to, self.mode)
    }
}

/// Whether a link into `to` (from `from`) must be one-directional.
pub(crate) fn must_be_one_way(from: NodeKind, to: NodeKind, mode: TransportMode) -> bool {
    mode == TransportMode::Uhv || to.is_plant() || (from.is_plant() && to.is_provincial_demand())
}

/// The transport network: nodes, links and the model years.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub nodes: BTreeMap<NodeId, Node>,
    pub links: Vec<Link>,
    pub years: Vec<Year>,
}

impl Network {
    /// Assembles a network, rejecting duplicate node ids and duplicate
    /// `(from, to, mode)` links. Other invariants are reported by [`validate`].
    pub fn from_parts(
        nodes: impl IntoIterator<Item = Node>,
        links: Vec<Link>,
        years: Vec<Year>,
    ) -> Result<Self, NetworkError> {
        let mut map = BTreeMap::new();
        for node in nodes {
            if map.contains_key(&node.id) {
                return Err(NetworkError::DuplicateNode(node.id));
            }
            map.insert(node.id.clone(), node);
        }
        let mut seen = BTreeSet::new();
        for link in &links {
            if !seen.insert(link.key()) {
                return Err(NetworkError::DuplicateLink {
                    from: link.from.clone(),
                    to: link.to.clone(),
                    mode: link.mode,
                });
            }
        }
        Ok(Self {
            nodes: map,
            links,
            years,
        })
    }

    pub fn node(&self, id: &NodeId) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn kind_of(&self, id: &NodeId) -> Option<NodeKind> {
        self.nodes.get(id).map(|n| n.kind)
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.values().filter(move |n| n.kind == kind)
    }

    /// Directed adjacency over link directions actually usable by flows.
    pub fn successors(&self) -> BTreeMap<&NodeId, Vec<&NodeId>> {
        let mut adj: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
        for link in &self.links {
            adj.entry(&link.from).or_default().push(&link.to);
            if link.bidirectional {
                adj.entry(&link.to).or_default().push(&link.from);
            }
        }
        adj
    }

    /// Nodes reachable from any of `sources` along usable link directions.
    pub fn reachable_from<'a>(&'a self, sources: impl IntoIterator<Item = &'a NodeId>) -> BTreeSet<&'a NodeId> {
        let adj = self.successors();
        let mut seen: BTreeSet<&NodeId> = BTreeSet::new();
        let mut queue: VecDeque<&NodeId> = VecDeque::new();
        for s in sources {
            if seen.insert(s) {
                queue.push_back(s);
            }
        }
        while let Some(n) = queue.pop_front() {
            for next in adj.get(n).into_iter().flatten() {
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        seen
    }

    /// Steel plants with a direct link to a port or navigation waypoint.
    pub fn is_port_located(&self, plant: &NodeId) -> bool {
        self.links.iter().any(|l| {
            let other = if &l.from == plant {
                &l.to
            } else if &l.to == plant {
                &l.from
            } else {
                return false;
            };
            matches!(
                self.kind_of(other),
                Some(NodeKind::Port | NodeKind::NavWaypointOcean | NodeKind::NavWaypointRiver)
            )
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enum_names_round_trip() {
        for k in NodeKind::ALL {
            assert_eq!(k.as_str().parse::<NodeKind>().unwrap(), k);
        }
        for m in TransportMode::ALL {
            assert_eq!(m.as_str().parse::<TransportMode>().unwrap(), m);
        }
        assert!("airship".parse::<TransportMode>().is_err());
    }

    #[test]
    fn duplicate_links_rejected() {
        let nodes = vec![
            Node::new("a", NodeKind::CityCenter).at(30.0, 110.0),
            Node::new("b", NodeKind::CityCenter).at(31.0, 111.0),
        ];
        let links = vec![
            Link::new("a", "b", TransportMode::Truck, 10.0),
            Link::new("a", "b", TransportMode::Truck, 12.0),
        ];
        assert!(matches!(
            Network::from_parts(nodes, links, vec![2019]),
            Err(NetworkError::DuplicateLink { .. })
        ));
    }

    #[test]
    fn one_way_rule() {
        use NodeKind::*;
        assert!(must_be_one_way(RailwayStop, PowerPlant, TransportMode::Rail));
        assert!(must_be_one_way(SteelPlant, ProvSteelDemand, TransportMode::Functional));
        assert!(must_be_one_way(PowerPlantUnit, ProvPowerDemand, TransportMode::Functional));
        assert!(!must_be_one_way(Port, CityCenter, TransportMode::Truck));
    }
}
