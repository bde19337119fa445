//! Re-verification of a solution from raw flows, without the constraint
//! rows the solver saw.

use super::{FlowProblem, FlowSolution, VarKey};
use crate::network::{NodeId, NodeKind, TransportMode};
use crate::supply::{CoalType, CvBin};
use serde::Serialize;
use std::collections::BTreeMap;

/// Absolute feasibility tolerance, Mt or PJ.
pub const TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Incident {
    NegativeValue { var: String, value: f64 },
    MassDeficit { node: NodeId, coal: CoalType, bin: CvBin, residual: f64 },
    /// Coal entering a node that neither consumes nor forwards it.
    Surplus { node: NodeId, coal: CoalType, bin: CvBin, amount: f64 },
    EnergyShortfall { node: NodeId, delivered: f64, demand: f64 },
    SupplyOverCap { node: NodeId, coal: CoalType, bin: CvBin, value: f64, cap: f64 },
    LinkOverCap { from: NodeId, to: NodeId, mode: TransportMode, flow: f64, cap: f64 },
    PortOverCap { node: NodeId, flow: f64, cap: f64 },
    ElecOverCap { from: NodeId, to: NodeId, energy: f64, cap: f64 },
    SteelOverCap { node: NodeId, flow: f64, cap: f64 },
    HccShortfall { node: NodeId, delivered: f64, required: f64 },
    MixViolation { from: NodeId, to: NodeId, coal: CoalType, residual: f64 },
}

impl Incident {
    pub fn node(&self) -> &NodeId {
        use Incident::*;
        match self {
            NegativeValue { .. } => {
                static NONE: NodeId = NodeId(String::new());
                &NONE
            }
            MassDeficit { node, .. }
            | Surplus { node, .. }
            | EnergyShortfall { node, .. }
            | SupplyOverCap { node, .. }
            | PortOverCap { node, .. }
            | SteelOverCap { node, .. }
            | HccShortfall { node, .. } => node,
            LinkOverCap { from, .. } | ElecOverCap { from, .. } | MixViolation { from, .. } => from,
        }
    }
}

/// Energy crossing one UHV arc, PJ.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UhvTransfer {
    pub from: NodeId,
    pub to: NodeId,
    pub sent: f64,
    pub received: f64,
    pub efficiency: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BalanceReport {
    /// Largest mass imbalance over all nodes and commodities, Mt: a deficit
    /// anywhere, or a surplus at a node that does not consume coal.
    pub max_mass_residual: f64,
    /// Largest energy shortfall against demand, PJ.
    pub max_energy_residual: f64,
    /// Largest HCC shortfall against the steel requirement, Mt.
    pub max_steel_shortfall: f64,
    /// Largest relative deviation of SCC/HCC or PCI/HCC from the mix.
    pub max_mix_error: f64,
    /// Σ cost × value, $.
    pub objective: f64,
    /// |reported − recomputed| / max(1, |recomputed|)
    pub objective_gap: f64,
    /// supply + inflow − outflow, Mt, per node and commodity.
    pub node_mass: BTreeMap<(NodeId, CoalType, CvBin), f64>,
    /// Net energy available for consumption, PJ, at nodes with energy demand.
    pub node_energy: BTreeMap<NodeId, f64>,
    /// HCC delivered, Mt, at steel demand nodes.
    pub hcc_delivered: BTreeMap<NodeId, f64>,
    pub uhv: Vec<UhvTransfer>,
    pub incidents: Vec<Incident>,
}

impl BalanceReport {
    pub fn is_clean(&self) -> bool {
        self.incidents.is_empty()
    }
}

fn consumes(kind: Option<NodeKind>) -> bool {
    matches!(
        kind,
        Some(NodeKind::CityCenter | NodeKind::ProvPowerDemand | NodeKind::ProvSteelDemand)
    )
}

/// Recomputes balances, capacities and ratios of `solution` from its raw
/// values and the problem's context. Anything off by more than
/// [`TOLERANCE`] is listed as an incident.
pub fn check_solution(problem: &FlowProblem, solution: &FlowSolution) -> BalanceReport {
    let ctx = &problem.context;
    let x = &solution.values;
    let mut r = BalanceReport::default();
    if x.len() != problem.vars.len() {
        return r;
    }
    let tol = TOLERANCE;

    let mut arc_flow: BTreeMap<(&NodeId, &NodeId, TransportMode), BTreeMap<(CoalType, CvBin), f64>> = BTreeMap::new();
    let mut supply: BTreeMap<(&NodeId, CoalType, CvBin), f64> = BTreeMap::new();
    for (key, (&v, name)) in problem.vars.iter().zip(x.iter().zip(&problem.names)) {
        if v < -tol {
            r.incidents.push(Incident::NegativeValue {
                var: name.clone(),
                value: v,
            });
        }
        match key {
            VarKey::Supply { node, coal, bin, .. } => {
                *supply.entry((node, *coal, *bin)).or_default() += v;
            }
            VarKey::Flow {
                from, to, mode, coal, bin, ..
            } => {
                *arc_flow.entry((from, to, *mode)).or_default().entry((*coal, *bin)).or_default() += v;
            }
        }
    }

    // Mass.
    let mut mass: BTreeMap<(NodeId, CoalType, CvBin), f64> = BTreeMap::new();
    for ((node, coal, bin), v) in &supply {
        *mass.entry(((*node).clone(), *coal, *bin)).or_default() += v;
    }
    for ((from, to, _), by_c) in &arc_flow {
        for ((coal, bin), v) in by_c {
            *mass.entry(((*from).clone(), *coal, *bin)).or_default() -= v;
            *mass.entry(((*to).clone(), *coal, *bin)).or_default() += v;
        }
    }
    for ((node, coal, bin), net) in &mass {
        let sends = ctx.senders.contains(node);
        let consumer = consumes(ctx.kinds.get(node).copied());
        let residual = if *net < 0.0 {
            -net
        } else if !consumer {
            *net
        } else {
            0.0
        };
        r.max_mass_residual = r.max_mass_residual.max(residual);
        if *net < -tol {
            r.incidents.push(Incident::MassDeficit {
                node: node.clone(),
                coal: *coal,
                bin: *bin,
                residual: -net,
            });
        } else if *net > tol && !consumer && (sends || ctx.kinds.contains_key(node)) {
            r.incidents.push(Incident::Surplus {
                node: node.clone(),
                coal: *coal,
                bin: *bin,
                amount: *net,
            });
        }
    }
    r.node_mass = mass;

    // Energy.
    let mut energy: BTreeMap<&NodeId, f64> = BTreeMap::new();
    for ((node, coal, bin), v) in &supply {
        if !coal.is_coking() {
            *energy.entry(node).or_default() += v * bin.pj_per_mt();
        }
    }
    for ((from, to, mode), by_c) in &arc_flow {
        let mult = ctx
            .multipliers
            .get(&((*from).clone(), (*to).clone(), *mode))
            .copied()
            .unwrap_or(1.0);
        let mut sent = 0.0;
        for ((coal, bin), v) in by_c {
            if !coal.is_coking() {
                sent += v * bin.pj_per_mt();
            }
        }
        *energy.entry(from).or_default() -= sent;
        *energy.entry(to).or_default() += sent * mult;
        if *mode == TransportMode::Uhv {
            r.uhv.push(UhvTransfer {
                from: (*from).clone(),
                to: (*to).clone(),
                sent,
                received: sent * mult,
                efficiency: mult,
            });
        }
    }
    let demand_nodes: std::collections::BTreeSet<&NodeId> =
        ctx.elec_demand.keys().chain(ctx.other_demand.keys()).collect();
    for node in demand_nodes {
        let need = ctx.elec_demand.get(node).copied().unwrap_or(0.0) + ctx.other_demand.get(node).copied().unwrap_or(0.0);
        let have = energy.get(node).copied().unwrap_or(0.0);
        r.node_energy.insert(node.clone(), have);
        let short = (need - have).max(0.0);
        r.max_energy_residual = r.max_energy_residual.max(short);
        if short > tol {
            r.incidents.push(Incident::EnergyShortfall {
                node: node.clone(),
                delivered: have,
                demand: need,
            });
        }
    }

    // Capacities.
    for ((node, coal, bin), cap) in &ctx.supply_caps {
        let v = supply.get(&(node, *coal, *bin)).copied().unwrap_or(0.0);
        if v > cap + tol {
            r.incidents.push(Incident::SupplyOverCap {
                node: node.clone(),
                coal: *coal,
                bin: *bin,
                value: v,
                cap: *cap,
            });
        }
    }
    let total = |by_c: &BTreeMap<(CoalType, CvBin), f64>| by_c.values().sum::<f64>();
    for ((from, to, mode), cap) in &ctx.link_caps {
        let flow = arc_flow.get(&(from, to, *mode)).map(total).unwrap_or(0.0);
        if flow > cap + tol {
            r.incidents.push(Incident::LinkOverCap {
                from: from.clone(),
                to: to.clone(),
                mode: *mode,
                flow,
                cap: *cap,
            });
        }
    }
    for (port, cap) in &ctx.port_caps {
        let flow: f64 = arc_flow.iter().filter(|((f, _, _), _)| *f == port).map(|(_, c)| total(c)).sum();
        if flow > cap + tol {
            r.incidents.push(Incident::PortOverCap {
                node: port.clone(),
                flow,
                cap: *cap,
            });
        }
    }
    for ((from, to, mode), cap) in &ctx.elec_caps {
        let mult = ctx.multipliers.get(&(from.clone(), to.clone(), *mode)).copied().unwrap_or(1.0);
        let delivered: f64 = arc_flow
            .get(&(from, to, *mode))
            .map(|c| c.iter().map(|((_, bin), v)| v * bin.pj_per_mt() * mult).sum())
            .unwrap_or(0.0);
        if delivered > cap + tol {
            r.incidents.push(Incident::ElecOverCap {
                from: from.clone(),
                to: to.clone(),
                energy: delivered,
                cap: *cap,
            });
        }
    }
    for (plant, cap) in &ctx.steel_caps {
        let flow: f64 = arc_flow
            .iter()
            .filter(|((f, _, _), _)| *f == plant)
            .flat_map(|(_, c)| c.iter().filter(|((coal, _), _)| coal.is_coking()).map(|(_, v)| *v))
            .sum();
        if flow > cap + tol {
            r.incidents.push(Incident::SteelOverCap {
                node: plant.clone(),
                flow,
                cap: *cap,
            });
        }
    }

    // Steel requirement and coking mix.
    let mix = ctx.coking_mix;
    let of = |c: &BTreeMap<(CoalType, CvBin), f64>, coal| c.get(&(coal, CvBin::ZERO)).copied().unwrap_or(0.0);
    for (node, steel) in &ctx.steel_demand {
        let delivered: f64 = arc_flow
            .iter()
            .filter(|((_, t, _), _)| *t == node)
            .map(|(_, c)| of(c, CoalType::Hcc))
            .sum();
        let required = mix.hcc * steel;
        r.hcc_delivered.insert(node.clone(), delivered);
        let short = (required - delivered).max(0.0);
        r.max_steel_shortfall = r.max_steel_shortfall.max(short);
        if short > tol {
            r.incidents.push(Incident::HccShortfall {
                node: node.clone(),
                delivered,
                required,
            });
        }
    }
    for ((from, to, _), by_c) in &arc_flow {
        let kinds = (ctx.kinds.get(*from), ctx.kinds.get(*to));
        if kinds != (Some(&NodeKind::SteelPlant), Some(&NodeKind::ProvSteelDemand)) {
            continue;
        }
        let hcc = of(by_c, CoalType::Hcc);
        for (coal, share) in [(CoalType::Scc, mix.scc), (CoalType::Pci, mix.pci)] {
            let v = of(by_c, coal);
            let residual = share * hcc - mix.hcc * v;
            if hcc > tol {
                let target = share / mix.hcc;
                r.max_mix_error = r.max_mix_error.max(((v / hcc) - target).abs() / target);
            }
            if residual.abs() > tol {
                r.incidents.push(Incident::MixViolation {
                    from: (*from).clone(),
                    to: (*to).clone(),
                    coal,
                    residual,
                });
            }
        }
    }

    r.objective = problem.objective_of(x);
    r.objective_gap = (solution.objective - r.objective).abs() / r.objective.abs().max(1.0);
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::optimizer::{solve, Backend};

    fn solved(f: &fixtures::Fixture) -> (FlowProblem, FlowSolution) {
        let p = f.formulate().unwrap();
        let s = solve(&p, &Backend::Embedded);
        assert!(s.is_optimal(), "{:?}", s.message);
        (p, s)
    }

    #[test]
    fn optimal_fixtures_are_clean() {
        for f in [
            fixtures::single_path(10.0, 50.0, 10.0, 5.0),
            fixtures::two_mines(3.0, 10.0, 50.0, 60.0, 5.0),
            fixtures::steel(1.0, 100.0),
            fixtures::canonical(),
        ] {
            let (p, s) = solved(&f);
            let r = check_solution(&p, &s);
            assert!(r.is_clean(), "{:?}", r.incidents);
            assert!(r.max_mass_residual <= TOLERANCE);
            assert!(r.max_energy_residual <= TOLERANCE);
            assert!(r.objective_gap <= 1e-6, "{}", r.objective_gap);
        }
    }

    #[test]
    fn perturbed_flow_flags_both_ends() {
        let (p, mut s) = solved(&fixtures::two_mines(3.0, 10.0, 50.0, 60.0, 5.0));
        let j = p
            .vars
            .iter()
            .position(|k| k.arc().is_some_and(|(a, b, _)| a.as_str() == "m1" && b.as_str() == "hub"))
            .unwrap();
        s.values[j] += 0.1;
        let r = check_solution(&p, &s);
        let flagged: Vec<&str> = r.incidents.iter().map(|i| i.node().as_str()).collect();
        assert!(flagged.contains(&"m1"), "{flagged:?}");
        assert!(flagged.contains(&"hub"), "{flagged:?}");
    }

    #[test]
    fn steel_mix_ratio() {
        let (p, s) = solved(&fixtures::steel(1.0, 100.0));
        let r = check_solution(&p, &s);
        assert!(r.max_mix_error <= 1e-9);
        let flows: BTreeMap<CoalType, f64> = p
            .vars
            .iter()
            .zip(&s.values)
            .filter(|(k, _)| k.arc().is_some_and(|(a, _, _)| a.as_str() == "plant"))
            .map(|(k, v)| (k.commodity().0, *v))
            .collect();
        let ratio = flows[&CoalType::Scc] / flows[&CoalType::Hcc];
        assert!((ratio - 0.176 / 0.581).abs() <= 1e-9 * (0.176 / 0.581));
        assert!((flows[&CoalType::Hcc] - 0.581).abs() < 1e-9);
    }

    #[test]
    fn uhv_energy_accounting() {
        let (p, s) = solved(&fixtures::canonical());
        let r = check_solution(&p, &s);
        assert_eq!(r.uhv.len(), 1);
        for t in &r.uhv {
            assert!((t.received - t.sent * t.efficiency).abs() <= 1e-9 * t.sent.max(1.0));
            assert_eq!(t.efficiency, 0.972);
        }
        for (node, pj) in &p.context.elec_demand {
            assert!(r.node_energy[node] >= pj - TOLERANCE);
        }
    }
}
