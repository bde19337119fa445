use super::{Constraint, Family, FlowProblem, OptimizerError, ProblemContext, Sense, VarKey};
use crate::demand::{CokingMix, DemandSet, YearDemand};
use crate::network::{Link, Network, NodeId, NodeKind, TransportMode};
use crate::supply::{effective_cost, link_unit_cost, CoalType, CvBin, PremiumModel, SupplyBook, Tariff};
use crate::years::Year;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Share of steel-plant capacity available to coking coal throughput.
pub const STEEL_UTILIZATION: f64 = 0.966;

#[derive(Clone, Debug, PartialEq)]
pub struct FormulateOptions {
    /// Restrict coking coal flows to arcs that can still reach a steel plant.
    pub prune_coking: bool,
    pub coking_mix: CokingMix,
    pub steel_utilization: f64,
}

impl Default for FormulateOptions {
    fn default() -> Self {
        Self {
            prune_coking: false,
            coking_mix: CokingMix::STANDARD,
            steel_utilization: STEEL_UTILIZATION,
        }
    }
}

type ArcKey = (NodeId, NodeId, TransportMode);
type Commodity = (CoalType, CvBin);

struct Arc<'a> {
    from: &'a NodeId,
    to: &'a NodeId,
    from_kind: NodeKind,
    to_kind: NodeKind,
    link: &'a Link,
    multiplier: f64,
}

impl Arc<'_> {
    fn key(&self) -> ArcKey {
        (self.from.clone(), self.to.clone(), self.link.mode)
    }

    fn carries(&self, c: CoalType) -> bool {
        use NodeKind::*;
        if self.link.mode == TransportMode::Uhv {
            return !c.is_coking();
        }
        match self.to_kind {
            PowerPlant | PowerPlantUnit | ProvPowerDemand => !c.is_coking(),
            SteelPlant | ProvSteelDemand => c.is_coking(),
            _ => true,
        }
    }

    fn delivers_electricity(&self) -> bool {
        self.link.mode == TransportMode::Uhv
            || (self.to_kind == NodeKind::ProvPowerDemand
                && matches!(self.from_kind, NodeKind::PowerPlant | NodeKind::PowerPlantUnit))
    }

    /// $/Mt for one Mt of commodity in `bin`.
    fn unit_cost(&self, bin: CvBin, tariff: &Tariff) -> Result<f64, OptimizerError> {
        Ok(match self.link.mode {
            TransportMode::Functional => 0.0,
            TransportMode::Uhv => {
                tariff.to_usd(tariff.uhv_cny_per_pj(self.link.distance_km)) * bin.pj_per_mt() * self.multiplier
            }
            _ => link_unit_cost(self.link, self.from_kind, self.to_kind, tariff)? * 1e6,
        })
    }
}

fn finite_at(series: &crate::years::YearSeries, year: Year) -> Option<f64> {
    if series.is_empty() {
        return None;
    }
    series.at(year).filter(|v| v.is_finite())
}

pub fn formulate(
    network: &Network,
    supply: &SupplyBook,
    demand: &DemandSet,
    tariff: &Tariff,
    premia: &PremiumModel,
    year: Year,
) -> Result<FlowProblem, OptimizerError> {
    let empty = YearDemand::default();
    let demand = demand.year(year).unwrap_or(&empty);
    formulate_with(network, supply, demand, tariff, premia, year, &FormulateOptions::default())
}

fn check_placement(network: &Network, demand: &YearDemand) -> Result<(), OptimizerError> {
    let groups = [
        (&demand.elec, "electricity", NodeKind::ProvPowerDemand),
        (&demand.other, "thermal", NodeKind::CityCenter),
        (&demand.steel, "steel", NodeKind::ProvSteelDemand),
    ];
    for (map, kind, expected) in groups {
        for node in map.keys() {
            match network.kind_of(node) {
                None => return Err(OptimizerError::UnknownNode(node.clone())),
                Some(k) if k != expected => {
                    return Err(OptimizerError::WrongDemandNode {
                        node: node.clone(),
                        kind,
                        expected: expected.as_str(),
                    })
                }
                Some(_) => {}
            }
        }
    }
    Ok(())
}

fn sanitize(raw: &str) -> String {
    raw.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect()
}

fn unique_names(raw: impl Iterator<Item = (String, Option<&'static str>)>) -> Vec<String> {
    let mut taken = BTreeSet::new();
    raw.map(|(base, hint)| {
        let base = sanitize(&base);
        let mut name = base.clone();
        if taken.contains(&name) {
            if let Some(hint) = hint {
                name = format!("{base}_{hint}");
            }
        }
        let mut n = 2;
        while taken.contains(&name) {
            name = format!("{base}_{n}");
            n += 1;
        }
        taken.insert(name.clone());
        name
    })
    .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn formulate_with(
    network: &Network,
    supply: &SupplyBook,
    demand: &YearDemand,
    tariff: &Tariff,
    premia: &PremiumModel,
    year: Year,
    options: &FormulateOptions,
) -> Result<FlowProblem, OptimizerError> {
    check_placement(network, demand)?;

    // Supply steps active this year.
    let mut offers: BTreeMap<(NodeId, CoalType, CvBin), (f64, f64)> = BTreeMap::new();
    for step in &supply.steps {
        if network.node(&step.node).is_none() {
            return Err(OptimizerError::UnknownNode(step.node.clone()));
        }
        let cap = step.capacity(year);
        let Some(cost) = effective_cost(step, year, premia) else {
            continue;
        };
        if cap > 0.0 {
            offers.insert((step.node.clone(), step.coal_type, step.bin()), (cap, cost));
        }
    }
    let commodities: BTreeSet<Commodity> = offers.keys().map(|(_, c, b)| (*c, *b)).collect();

    let mut arcs = Vec::new();
    for link in &network.links {
        let ends = [(&link.from, &link.to), (&link.to, &link.from)];
        let n = if link.bidirectional && link.mode != TransportMode::Uhv { 2 } else { 1 };
        for &(from, to) in &ends[..n] {
            let from_kind = network.kind_of(from).ok_or_else(|| OptimizerError::UnknownNode(from.clone()))?;
            let to_kind = network.kind_of(to).ok_or_else(|| OptimizerError::UnknownNode(to.clone()))?;
            let multiplier = match link.mode {
                TransportMode::Uhv => link
                    .conv_eff
                    .ok_or_else(|| OptimizerError::MissingEfficiency(format!("UHV link {from}-{to}")))?,
                TransportMode::Functional if to_kind == NodeKind::ProvPowerDemand && from_kind.is_plant() => network
                    .node(from)
                    .and_then(|n| n.conv_eff)
                    .ok_or_else(|| OptimizerError::MissingEfficiency(format!("node {from}")))?,
                _ => 1.0,
            };
            arcs.push(Arc {
                from,
                to,
                from_kind,
                to_kind,
                link,
                multiplier,
            });
        }
    }

    let coking_ok: Option<BTreeSet<&NodeId>> = options.prune_coking.then(|| {
        let mut preds: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
        for a in &arcs {
            preds.entry(a.to).or_default().push(a.from);
        }
        let mut seen: BTreeSet<&NodeId> = network.nodes_of_kind(NodeKind::SteelPlant).map(|n| &n.id).collect();
        let mut queue: VecDeque<&NodeId> = seen.iter().copied().collect();
        while let Some(n) = queue.pop_front() {
            for p in preds.get(n).into_iter().flatten() {
                if seen.insert(p) {
                    queue.push_back(p);
                }
            }
        }
        seen.extend(network.nodes_of_kind(NodeKind::ProvSteelDemand).map(|n| &n.id));
        seen
    });

    // Variables.
    let mut keyed: BTreeMap<VarKey, f64> = BTreeMap::new();
    for ((node, coal, bin), (_, cost)) in &offers {
        let key = VarKey::Supply {
            node: node.clone(),
            coal: *coal,
            bin: *bin,
            year,
        };
        keyed.insert(key, cost * 1e6);
    }
    let mut arc_commodities: Vec<Vec<Commodity>> = Vec::with_capacity(arcs.len());
    for arc in &arcs {
        let mut carried = Vec::new();
        for &(coal, bin) in &commodities {
            if !arc.carries(coal) {
                continue;
            }
            if coal.is_coking() && coking_ok.as_ref().is_some_and(|ok| !ok.contains(arc.to)) {
                continue;
            }
            let key = VarKey::Flow {
                from: arc.from.clone(),
                to: arc.to.clone(),
                mode: arc.link.mode,
                coal,
                bin,
                year,
            };
            keyed.insert(key, arc.unit_cost(bin, tariff)?);
            carried.push((coal, bin));
        }
        arc_commodities.push(carried);
    }
    let vars: Vec<VarKey> = keyed.keys().cloned().collect();
    let costs: Vec<f64> = keyed.values().copied().collect();
    let names = unique_names(vars.iter().map(|k| {
        let hint = k.arc().map(|(_, _, m)| m.as_str());
        (k.to_string(), hint)
    }));
    let index: BTreeMap<&VarKey, usize> = vars.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let flow_idx = |arc: &Arc, (coal, bin): Commodity| {
        index
            .get(&VarKey::Flow {
                from: arc.from.clone(),
                to: arc.to.clone(),
                mode: arc.link.mode,
                coal,
                bin,
                year,
            })
            .copied()
    };
    let supply_idx = |node: &NodeId, (coal, bin): Commodity| {
        index
            .get(&VarKey::Supply {
                node: node.clone(),
                coal,
                bin,
                year,
            })
            .copied()
    };

    let mut out_arcs: BTreeMap<&NodeId, Vec<usize>> = BTreeMap::new();
    let mut in_arcs: BTreeMap<&NodeId, Vec<usize>> = BTreeMap::new();
    for (i, a) in arcs.iter().enumerate() {
        out_arcs.entry(a.from).or_default().push(i);
        in_arcs.entry(a.to).or_default().push(i);
    }

    // Demand must be reachable from some active supply.
    let sources: BTreeSet<&NodeId> = offers.keys().map(|(n, _, _)| n).collect();
    let mut reach = sources.clone();
    let mut queue: VecDeque<&NodeId> = sources.into_iter().collect();
    while let Some(n) = queue.pop_front() {
        for &i in out_arcs.get(n).into_iter().flatten() {
            if !arc_commodities[i].is_empty() && reach.insert(arcs[i].to) {
                queue.push_back(arcs[i].to);
            }
        }
    }
    let demand_nodes = demand
        .elec
        .iter()
        .chain(&demand.other)
        .chain(&demand.steel)
        .filter(|(_, v)| **v > 0.0)
        .map(|(n, _)| n);
    for node in demand_nodes {
        if !reach.contains(node) {
            return Err(OptimizerError::Unreachable(node.clone()));
        }
    }

    let mut rows: Vec<Constraint> = Vec::new();
    let mut row = |family: Family, tag: String, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64, node: Option<&NodeId>| {
        rows.push(Constraint {
            family,
            name: format!("{}_{tag}", family.prefix()),
            terms,
            sense,
            rhs,
            node: node.cloned(),
        });
    };

    for ((node, coal, bin), (cap, _)) in &offers {
        if cap.is_finite() {
            let j = supply_idx(node, (*coal, *bin)).expect("supply variable");
            row(Family::SupplyCap, format!("{node}_{coal}_{bin}"), vec![(j, 1.0)], Sense::Le, *cap, Some(node));
        }
    }

    for (node, outs) in &out_arcs {
        let shipped: BTreeSet<Commodity> = outs.iter().flat_map(|i| arc_commodities[*i].iter().copied()).collect();
        for c in shipped {
            let mut terms = Vec::new();
            terms.extend(supply_idx(node, c).map(|j| (j, 1.0)));
            for &i in in_arcs.get(node).into_iter().flatten() {
                terms.extend(flow_idx(&arcs[i], c).map(|j| (j, 1.0)));
            }
            for &i in outs {
                terms.extend(flow_idx(&arcs[i], c).map(|j| (j, -1.0)));
            }
            row(Family::MassBalance, format!("{node}_{}_{}", c.0, c.1), terms, Sense::Ge, 0.0, Some(node));
        }
    }

    let thermal: Vec<Commodity> = commodities.iter().copied().filter(|(c, _)| !c.is_coking()).collect();
    for node in network.nodes.keys() {
        let need = demand.elec.get(node).copied().unwrap_or(0.0) + demand.other.get(node).copied().unwrap_or(0.0);
        let ins = in_arcs.get(node).map(Vec::as_slice).unwrap_or(&[]);
        let converts = ins.iter().any(|i| arcs[*i].multiplier != 1.0) && out_arcs.contains_key(node);
        if need <= 0.0 && !converts {
            continue;
        }
        let mut terms = Vec::new();
        for &c in &thermal {
            let pj = c.1.pj_per_mt();
            terms.extend(supply_idx(node, c).map(|j| (j, pj)));
            for &i in ins {
                terms.extend(flow_idx(&arcs[i], c).map(|j| (j, pj * arcs[i].multiplier)));
            }
            for &i in out_arcs.get(node).into_iter().flatten() {
                terms.extend(flow_idx(&arcs[i], c).map(|j| (j, -pj)));
            }
        }
        if need > 0.0 && !terms.iter().any(|(_, a)| *a > 0.0) {
            return Err(OptimizerError::Unreachable(node.clone()));
        }
        row(Family::EnergyBalance, node.to_string(), terms, Sense::Ge, need.max(0.0), Some(node));
    }

    let mut link_caps = BTreeMap::new();
    for (i, arc) in arcs.iter().enumerate() {
        let Some(cap) = finite_at(&arc.link.transp_capa, year) else {
            continue;
        };
        let terms: Vec<_> = arc_commodities[i].iter().filter_map(|c| flow_idx(arc, *c)).map(|j| (j, 1.0)).collect();
        link_caps.insert(arc.key(), cap);
        if !terms.is_empty() {
            row(Family::LinkCap, format!("{}_{}_{}", arc.from, arc.to, arc.link.mode), terms, Sense::Le, cap, Some(arc.from));
        }
    }

    let mut port_caps = BTreeMap::new();
    for port in network.nodes_of_kind(NodeKind::Port) {
        let Some(cap) = finite_at(&port.port_capa, year) else {
            continue;
        };
        port_caps.insert(port.id.clone(), cap);
        let terms: Vec<_> = out_arcs
            .get(&port.id)
            .into_iter()
            .flatten()
            .flat_map(|i| arc_commodities[*i].iter().filter_map(|c| flow_idx(&arcs[*i], *c)))
            .map(|j| (j, 1.0))
            .collect();
        if !terms.is_empty() {
            row(Family::PortCap, port.id.to_string(), terms, Sense::Le, cap, Some(&port.id));
        }
    }

    let mut elec_caps = BTreeMap::new();
    for (i, arc) in arcs.iter().enumerate() {
        if !arc.delivers_electricity() {
            continue;
        }
        let Some(cap) = finite_at(&arc.link.elec_capa, year) else {
            continue;
        };
        elec_caps.insert(arc.key(), cap);
        let terms: Vec<_> = arc_commodities[i]
            .iter()
            .filter_map(|c| flow_idx(arc, *c).map(|j| (j, c.1.pj_per_mt() * arc.multiplier)))
            .collect();
        if !terms.is_empty() {
            row(Family::ElecCap, format!("{}_{}", arc.from, arc.to), terms, Sense::Le, cap, Some(arc.from));
        }
    }

    let mut steel_caps = BTreeMap::new();
    for plant in network.nodes_of_kind(NodeKind::SteelPlant) {
        let Some(cap) = finite_at(&plant.stpt_capa, year) else {
            continue;
        };
        let cap = cap * options.steel_utilization;
        steel_caps.insert(plant.id.clone(), cap);
        let terms: Vec<_> = out_arcs
            .get(&plant.id)
            .into_iter()
            .flatten()
            .flat_map(|i| {
                arc_commodities[*i]
                    .iter()
                    .filter(|c| c.0.is_coking())
                    .filter_map(|c| flow_idx(&arcs[*i], *c))
            })
            .map(|j| (j, 1.0))
            .collect();
        if !terms.is_empty() {
            row(Family::SteelCap, plant.id.to_string(), terms, Sense::Le, cap, Some(&plant.id));
        }
    }

    let mix = options.coking_mix;
    let hcc = (CoalType::Hcc, CvBin::ZERO);
    for (node, steel) in &demand.steel {
        if *steel <= 0.0 {
            continue;
        }
        let terms: Vec<_> = in_arcs
            .get(node)
            .into_iter()
            .flatten()
            .filter_map(|i| flow_idx(&arcs[*i], hcc))
            .map(|j| (j, 1.0))
            .collect();
        if terms.is_empty() {
            return Err(OptimizerError::Unreachable(node.clone()));
        }
        row(Family::Hcc, node.to_string(), terms, Sense::Ge, mix.hcc * steel, Some(node));
    }

    for arc in &arcs {
        if arc.from_kind != NodeKind::SteelPlant || arc.to_kind != NodeKind::ProvSteelDemand {
            continue;
        }
        let x_hcc = flow_idx(arc, hcc);
        for (coal, share) in [(CoalType::Scc, mix.scc), (CoalType::Pci, mix.pci)] {
            let other = flow_idx(arc, (coal, CvBin::ZERO));
            let mut terms = Vec::new();
            terms.extend(x_hcc.map(|j| (j, share)));
            terms.extend(other.map(|j| (j, -mix.hcc)));
            if !terms.is_empty() {
                let tag = format!("{}_{}_{}_{}", coal.as_str(), arc.from, arc.to, arc.link.mode);
                row(Family::CokingMix, tag, terms, Sense::Eq, 0.0, Some(arc.from));
            }
        }
    }

    let row_names = unique_names(rows.iter().map(|r| (r.name.clone(), None)));
    for (r, name) in rows.iter_mut().zip(row_names) {
        r.name = name;
    }

    let context = ProblemContext {
        elec_demand: demand.elec.clone(),
        other_demand: demand.other.clone(),
        steel_demand: demand.steel.clone(),
        kinds: network.nodes.iter().map(|(id, n)| (id.clone(), n.kind)).collect(),
        multipliers: arcs.iter().map(|a| (a.key(), a.multiplier)).collect(),
        senders: out_arcs.keys().map(|n| (*n).clone()).collect(),
        supply_caps: offers.iter().map(|(k, (cap, _))| (k.clone(), *cap)).collect(),
        link_caps,
        elec_caps,
        port_caps,
        steel_caps,
        coking_mix: mix,
    };

    Ok(FlowProblem {
        year,
        vars,
        costs,
        names,
        rows,
        context,
    })
}
