use super::{must_be_one_way, Network, NodeId, NodeKind, TransportMode};
use std::collections::BTreeSet;
use std::fmt;

/// One broken network invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    DanglingLink { from: NodeId, to: NodeId, missing: NodeId },
    DuplicateLink { from: NodeId, to: NodeId, mode: TransportMode },
    MissingCoords(NodeId),
    InvalidCoords(NodeId),
    NegativeCapacity { id: String, what: &'static str },
    BadConvEff { id: String, value: Option<f64> },
    NegativeDistance { from: NodeId, to: NodeId },
    DirectionRule { from: NodeId, to: NodeId, expected_one_way: bool },
    ModeMismatch { from: NodeId, to: NodeId, mode: TransportMode },
    OceanBeyondLimit { from: NodeId, to: NodeId },
    UnreachableDemand(NodeId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingLink { from, to, missing } => {
                write!(f, "link {from} -> {to}: endpoint `{missing}` does not exist")
            }
            Violation::DuplicateLink { from, to, mode } => {
                write!(f, "link {from} -> {to} ({mode}) appears more than once")
            }
            Violation::MissingCoords(id) => write!(f, "node {id}: coordinates required"),
            Violation::InvalidCoords(id) => write!(f, "node {id}: coordinates out of range"),
            Violation::NegativeCapacity { id, what } => write!(f, "{id}: negative {what}"),
            Violation::BadConvEff { id, value } => {
                write!(f, "{id}: conversion efficiency {value:?} not in (0, 1]")
            }
            Violation::NegativeDistance { from, to } => {
                write!(f, "link {from} -> {to}: negative distance")
            }
            Violation::DirectionRule {
                from,
                to,
                expected_one_way,
            } => {
                let want = if *expected_one_way { "one-directional" } else { "bidirectional" };
                write!(f, "link {from} -> {to}: must be {want}")
            }
            Violation::ModeMismatch { from, to, mode } => {
                write!(f, "link {from} -> {to}: mode {mode} not allowed between these node kinds")
            }
            Violation::OceanBeyondLimit { from, to } => {
                write!(f, "link {from} -> {to}: ocean vessel beyond navigable limit")
            }
            Violation::UnreachableDemand(id) => {
                write!(f, "demand node {id}: not reachable from any supplying plant")
            }
        }
    }
}

/// All invariant violations found in a network; empty means valid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate(network: &Network) -> ValidationReport {
    let mut out = Vec::new();

    for node in network.nodes.values() {
        match node.coords {
            Some(c) if c.check().is_err() => out.push(Violation::InvalidCoords(node.id.clone())),
            None if node.kind.is_geographic() => out.push(Violation::MissingCoords(node.id.clone())),
            _ => {}
        }
        if node.port_capa.min_value().is_some_and(|v| v < 0.0) {
            out.push(Violation::NegativeCapacity {
                id: node.id.to_string(),
                what: "port capacity",
            });
        }
        if node.stpt_capa.min_value().is_some_and(|v| v < 0.0) {
            out.push(Violation::NegativeCapacity {
                id: node.id.to_string(),
                what: "steel capacity",
            });
        }
        let eff_ok = |e: Option<f64>| e.is_some_and(|e| e > 0.0 && e <= 1.0);
        let needs_eff = node.kind == NodeKind::PowerPlantUnit;
        if (needs_eff && !eff_ok(node.conv_eff)) || (node.conv_eff.is_some() && !eff_ok(node.conv_eff)) {
            out.push(Violation::BadConvEff {
                id: node.id.to_string(),
                value: node.conv_eff,
            });
        }
    }

    let mut seen = BTreeSet::new();
    for link in &network.links {
        if !seen.insert(link.key()) {
            out.push(Violation::DuplicateLink {
                from: link.from.clone(),
                to: link.to.clone(),
                mode: link.mode,
            });
        }
        let from = network.node(&link.from);
        let to = network.node(&link.to);
        for (end, id) in [(from, &link.from), (to, &link.to)] {
            if end.is_none() {
                out.push(Violation::DanglingLink {
                    from: link.from.clone(),
                    to: link.to.clone(),
                    missing: id.clone(),
                });
            }
        }
        if !(link.distance_km >= 0.0) {
            out.push(Violation::NegativeDistance {
                from: link.from.clone(),
                to: link.to.clone(),
            });
        }
        let link_id = format!("link {} -> {}", link.from, link.to);
        if link.transp_capa.min_value().is_some_and(|v| v < 0.0)
            || link.elec_capa.min_value().is_some_and(|v| v < 0.0)
        {
            out.push(Violation::NegativeCapacity {
                id: link_id.clone(),
                what: "link capacity",
            });
        }
        if link.mode == TransportMode::Uhv && !link.conv_eff.is_some_and(|e| e > 0.0 && e <= 1.0) {
            out.push(Violation::BadConvEff {
                id: link_id,
                value: link.conv_eff,
            });
        }
        let (Some(from), Some(to)) = (from, to) else {
            continue;
        };

        let one_way = must_be_one_way(from.kind, to.kind, link.mode);
        if one_way == link.bidirectional {
            out.push(Violation::DirectionRule {
                from: link.from.clone(),
                to: link.to.clone(),
                expected_one_way: one_way,
            });
        }

        use NodeKind::*;
        let mode_ok = match link.mode {
            TransportMode::Uhv => from.kind == ProvPowerDemand && to.kind == ProvPowerDemand,
            TransportMode::Functional => matches!(
                (from.kind, to.kind),
                (PowerPlant, PowerPlantUnit)
                    | (PowerPlantUnit, ProvPowerDemand)
                    | (PowerPlant, ProvPowerDemand)
                    | (SteelPlant, ProvSteelDemand)
            ),
            _ => !from.kind.is_provincial_demand()
                && !to.kind.is_provincial_demand()
                && from.kind != PowerPlantUnit
                && to.kind != PowerPlantUnit,
        };
        if !mode_ok {
            out.push(Violation::ModeMismatch {
                from: link.from.clone(),
                to: link.to.clone(),
                mode: link.mode,
            });
        }
        // electricity leaving a plant is credited at the plant's efficiency
        if link.mode == TransportMode::Functional
            && to.kind == ProvPowerDemand
            && !from.conv_eff.is_some_and(|e| e > 0.0 && e <= 1.0)
        {
            out.push(Violation::BadConvEff {
                id: from.id.to_string(),
                value: from.conv_eff,
            });
        }
        if link.mode == TransportMode::OceanShip
            && [from, to]
                .iter()
                .any(|n| n.kind == NavWaypointRiver && n.ocean_navigable == Some(false))
        {
            out.push(Violation::OceanBeyondLimit {
                from: link.from.clone(),
                to: link.to.clone(),
            });
        }
    }

    let units = network
        .nodes
        .values()
        .filter(|n| matches!(n.kind, NodeKind::PowerPlantUnit | NodeKind::PowerPlant))
        .map(|n| &n.id);
    let from_units = network.reachable_from(units);
    let from_steel = network.reachable_from(network.nodes_of_kind(NodeKind::SteelPlant).map(|n| &n.id));
    for node in network.nodes.values() {
        let reached = match node.kind {
            NodeKind::ProvPowerDemand => from_units.contains(&node.id),
            NodeKind::ProvSteelDemand => from_steel.contains(&node.id),
            _ => true,
        };
        if !reached {
            out.push(Violation::UnreachableDemand(node.id.clone()));
        }
    }

    ValidationReport { violations: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Link, Node};

    fn small() -> Network {
        let nodes = vec![
            Node::new("mine", NodeKind::Mine).at(39.0, 110.0).in_province("NM"),
            Node::new("pp", NodeKind::PowerPlant).at(39.1, 110.1).in_province("NM"),
            Node::new("ppu", NodeKind::PowerPlantUnit).in_province("NM").with_conv_eff(0.4),
            Node::new("pd", NodeKind::ProvPowerDemand).in_province("NM"),
        ];
        let links = vec![
            Link::new("mine", "pp", TransportMode::Truck, 12.0).one_way(),
            Link::new("pp", "ppu", TransportMode::Functional, 0.0).one_way(),
            Link::new("ppu", "pd", TransportMode::Functional, 0.0).one_way(),
        ];
        Network::from_parts(nodes, links, vec![2019]).unwrap()
    }

    #[test]
    fn clean_network_has_empty_report() {
        let report = validate(&small());
        assert!(report.is_clean(), "{:?}", report.violations);
    }

    #[test]
    fn dangling_link_reported_once() {
        let mut n = small();
        n.links.push(Link::new("mine", "ghost", TransportMode::Rail, 5.0));
        let report = validate(&n);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(&report.violations[0], Violation::DanglingLink { missing, .. } if missing.as_str() == "ghost"));
    }

    #[test]
    fn bidirectional_plant_to_demand_reported() {
        let mut n = small();
        n.links[2].bidirectional = true;
        let report = validate(&n);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(report.violations[0], Violation::DirectionRule { expected_one_way: true, .. }));
    }

    #[test]
    fn unreachable_demand_reported() {
        let mut n = small();
        n.links.pop();
        let report = validate(&n);
        assert_eq!(report.violations, vec![Violation::UnreachableDemand("pd".into())]);
    }

    #[test]
    fn unit_efficiency_checked() {
        let mut n = small();
        n.nodes.get_mut(&NodeId::from("ppu")).unwrap().conv_eff = Some(1.2);
        assert!(!validate(&n).is_clean());
    }
}
