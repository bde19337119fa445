//! Small synthetic inputs for tests, examples and the oracle comparisons.
//!
//! Simple fixtures use a tariff of 1 USD per t-km with no handling charge,
//! so a link of `d` km costs exactly `d` $/t.

use crate::demand::YearDemand;
use crate::network::{Link, Network, Node, NodeId, NodeKind, TransportMode};
use crate::optimizer::{formulate_with, FlowProblem, FormulateOptions, OptimizerError};
use crate::supply::{CoalType, CvBin, PremiumModel, Quality, SupplyBook, SupplyStep, Tariff};
use crate::years::{Year, YearSeries};
use std::collections::BTreeMap;

pub const YEAR: Year = 2020;

/// Everything `formulate_with` needs for one year.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub network: Network,
    pub supply: SupplyBook,
    pub demand: YearDemand,
    pub tariff: Tariff,
    pub premia: PremiumModel,
    pub year: Year,
    pub options: FormulateOptions,
}

impl Fixture {
    pub fn formulate(&self) -> Result<FlowProblem, OptimizerError> {
        formulate_with(
            &self.network,
            &self.supply,
            &self.demand,
            &self.tariff,
            &self.premia,
            self.year,
            &self.options,
        )
    }
}

pub fn unit_tariff() -> Tariff {
    Tariff {
        exchange_rate: 1.0,
        rates: TransportMode::ALL
            .into_iter()
            .filter(|m| m.carries_coal())
            .map(|m| (m, 1.0))
            .collect(),
        handling: Vec::new(),
        default_handling: 0.0,
        lines: BTreeMap::new(),
        ..Tariff::default()
    }
}

pub fn thermal_bin() -> CvBin {
    CvBin::new(5500).expect("bin")
}

pub fn step(mine: &str, node: &str, country: &str, coal: CoalType, quality: Quality, cap: f64, cost: f64) -> SupplyStep {
    SupplyStep {
        mine_id: mine.to_string(),
        node: NodeId::from(node),
        country: country.to_string(),
        coal_type: coal,
        quality,
        prod_capa: YearSeries::constant_from(2000, cap),
        prod_cost: YearSeries::constant_from(2000, cost),
        reserves: f64::INFINITY,
    }
}

fn thermal(mine: &str, cap: f64, cost: f64) -> SupplyStep {
    step(mine, mine, "CN", CoalType::Thermal, Quality::Cv(thermal_bin()), cap, cost)
}

fn assemble(nodes: Vec<Node>, links: Vec<Link>, steps: Vec<SupplyStep>, demand: YearDemand, tariff: Tariff) -> Fixture {
    Fixture {
        network: Network::from_parts(nodes, links, vec![YEAR]).expect("fixture network"),
        supply: SupplyBook::new(steps).expect("fixture supply"),
        demand,
        tariff,
        premia: PremiumModel::default(),
        year: YEAR,
        options: FormulateOptions::default(),
    }
}

/// PJ needed to match `mt` of 5500 kcal/kg coal.
pub fn pj_of(mt: f64) -> f64 {
    mt * thermal_bin().pj_per_mt()
}

/// One mine, one one-way rail link of `link_cost` $/t, one city whose
/// demand equals `demand_mt` of 5500 kcal/kg coal.
pub fn single_path(cap: f64, mine_cost: f64, link_cost: f64, demand_mt: f64) -> Fixture {
    let nodes = vec![
        Node::new("mine", NodeKind::Mine).at(38.0, 112.0).in_province("SX"),
        Node::new("city", NodeKind::CityCenter).at(39.9, 116.4).in_province("BJ"),
    ];
    let links = vec![Link::new("mine", "city", TransportMode::Rail, link_cost)
        .one_way()
        .with_capacity(2000, 100.0)];
    let mut demand = YearDemand::default();
    demand.other.insert(NodeId::from("city"), pj_of(demand_mt));
    assemble(nodes, links, vec![thermal("mine", cap, mine_cost)], demand, unit_tariff())
}

/// Two mines behind a shared railway stop, each 1 $/t away from it, and a
/// city at zero distance from the stop.
pub fn two_mines(cap1: f64, cap2: f64, cost1: f64, cost2: f64, demand_mt: f64) -> Fixture {
    let nodes = vec![
        Node::new("m1", NodeKind::Mine).at(38.0, 112.0).in_province("SX"),
        Node::new("m2", NodeKind::Mine).at(38.5, 111.0).in_province("SX"),
        Node::new("hub", NodeKind::RailwayStop).at(38.2, 112.5).in_province("SX"),
        Node::new("city", NodeKind::CityCenter).at(38.2, 112.6).in_province("SX"),
    ];
    let links = vec![
        Link::new("m1", "hub", TransportMode::Rail, 1.0),
        Link::new("m2", "hub", TransportMode::Rail, 1.0),
        Link::new("hub", "city", TransportMode::Rail, 0.0).one_way(),
    ];
    let mut demand = YearDemand::default();
    demand.other.insert(NodeId::from("city"), pj_of(demand_mt));
    let steps = vec![thermal("m1", cap1, cost1), thermal("m2", cap2, cost2)];
    assemble(nodes, links, steps, demand, unit_tariff())
}

/// Three coking mines feeding one steel plant of `capacity` Mt, which serves
/// `steel_mt` of primary steel. A side branch carries thermal coal from the
/// HCC mine's node to a city so that coking pruning has arcs to drop.
pub fn steel(steel_mt: f64, capacity: f64) -> Fixture {
    let mut plant = Node::new("plant", NodeKind::SteelPlant).at(39.0, 118.0).in_province("HE");
    plant.stpt_capa = YearSeries::constant_from(2000, capacity);
    let nodes = vec![
        Node::new("hcc", NodeKind::Mine).at(37.0, 112.0).in_province("SX"),
        Node::new("scc", NodeKind::Mine).at(37.5, 112.0).in_province("SX"),
        Node::new("pci", NodeKind::Mine).at(36.5, 112.0).in_province("SX"),
        Node::new("tmine", NodeKind::Mine).at(36.0, 113.0).in_province("SX"),
        plant,
        Node::new("psd", NodeKind::ProvSteelDemand).in_province("HE"),
        Node::new("city", NodeKind::CityCenter).at(38.0, 114.5).in_province("HE"),
    ];
    let rail = |a: &str, b: &str, km| Link::new(a, b, TransportMode::Rail, km).one_way();
    let links = vec![
        rail("hcc", "plant", 10.0),
        rail("scc", "plant", 12.0),
        rail("pci", "plant", 14.0),
        Link::new("plant", "psd", TransportMode::Functional, 0.0).one_way(),
        rail("hcc", "city", 5.0),
        rail("tmine", "city", 8.0),
    ];
    let coking = |node: &str, coal, cost| step(node, node, "CN", coal, Quality::Csr(55.0), 50.0, cost);
    let steps = vec![
        coking("hcc", CoalType::Hcc, 120.0),
        coking("scc", CoalType::Scc, 90.0),
        coking("pci", CoalType::Pci, 80.0),
        thermal("tmine", 20.0, 40.0),
    ];
    let mut demand = YearDemand::default();
    demand.steel.insert(NodeId::from("psd"), steel_mt);
    demand.other.insert(NodeId::from("city"), pj_of(2.0));
    assemble(nodes, links, steps, demand, unit_tariff())
}

/// A desk-scale system with every node kind, ports, an import route, unit
/// conversion efficiencies, a UHV line and steel demand, priced with the
/// default tariff.
pub fn canonical() -> Fixture {
    let mut qhd = Node::new("qhd", NodeKind::Port).at(39.93, 119.6).in_province("HE");
    qhd.port_capa = YearSeries::constant_from(2000, 60.0);
    let mut lyg = Node::new("lyg", NodeKind::Port).at(34.6, 119.2).in_province("JS");
    lyg.port_capa = YearSeries::constant_from(2000, 80.0);
    let mut mill = Node::new("mill_js", NodeKind::SteelPlant).at(34.3, 118.9).in_province("JS");
    mill.stpt_capa = YearSeries::constant_from(2000, 20.0);
    let nodes = vec![
        Node::new("sx_mine", NodeKind::Mine).at(37.9, 112.5).in_province("SX"),
        Node::new("datong", NodeKind::RailwayStop).at(40.1, 113.3).in_province("SX"),
        qhd,
        Node::new("bohai", NodeKind::NavWaypointOcean).at(39.0, 120.5),
        Node::new("au_mine", NodeKind::Mine).at(-32.9, 151.8).in_country("AU"),
        lyg,
        Node::new("plant_sx", NodeKind::PowerPlant).at(40.0, 113.2).in_province("SX"),
        Node::new("unit_sx", NodeKind::PowerPlantUnit).at(40.0, 113.2).in_province("SX").with_conv_eff(0.38),
        Node::new("pd_sx", NodeKind::ProvPowerDemand).in_province("SX"),
        Node::new("plant_js", NodeKind::PowerPlant).at(34.5, 119.0).in_province("JS").with_conv_eff(0.40),
        Node::new("pd_js", NodeKind::ProvPowerDemand).in_province("JS"),
        Node::new("city_js", NodeKind::CityCenter).at(32.1, 118.8).in_province("JS"),
        mill,
        Node::new("psd_js", NodeKind::ProvSteelDemand).in_province("JS"),
    ];
    use TransportMode::*;
    let mut uhv = Link::new("pd_sx", "pd_js", Uhv, 1000.0).one_way();
    uhv.conv_eff = Some(1.0 - 0.028);
    uhv.elec_capa = YearSeries::constant_from(2000, 80.0);
    let mut unit_out = Link::new("unit_sx", "pd_sx", Functional, 0.0).one_way();
    unit_out.elec_capa = YearSeries::constant_from(2000, 300.0);
    let links = vec![
        Link::new("sx_mine", "datong", Rail, 50.0).with_capacity(2000, 200.0),
        Link::new("datong", "qhd", Rail, 650.0).with_capacity(2000, 150.0).on_line("Daqin"),
        Link::new("datong", "plant_sx", Rail, 30.0).one_way(),
        Link::new("plant_sx", "unit_sx", Functional, 0.0).one_way(),
        unit_out,
        uhv,
        Link::new("qhd", "bohai", OceanShip, 50.0),
        Link::new("bohai", "lyg", OceanShip, 700.0),
        Link::new("au_mine", "bohai", OceanShip, 6500.0).one_way(),
        Link::new("lyg", "city_js", Rail, 250.0),
        Link::new("lyg", "plant_js", Rail, 80.0).one_way(),
        Link::new("plant_js", "pd_js", Functional, 0.0).one_way(),
        Link::new("lyg", "mill_js", Rail, 60.0).one_way(),
        Link::new("mill_js", "psd_js", Functional, 0.0).one_way(),
    ];
    let b6000 = CvBin::new(6000).expect("bin");
    let steps = vec![
        thermal("sx_mine", 120.0, 38.0),
        step("sx_hcc", "sx_mine", "CN", CoalType::Hcc, Quality::Csr(62.0), 6.0, 120.0),
        step("sx_scc", "sx_mine", "CN", CoalType::Scc, Quality::Csr(55.0), 10.0, 90.0),
        step("sx_pci", "sx_mine", "CN", CoalType::Pci, Quality::Csr(50.0), 10.0, 85.0),
        step("au_thermal", "au_mine", "AU", CoalType::Thermal, Quality::Cv(b6000), 30.0, 52.0),
        step("au_hcc", "au_mine", "AU", CoalType::Hcc, Quality::Csr(70.0), 10.0, 150.0),
    ];
    let mut demand = YearDemand::default();
    demand.elec.insert(NodeId::from("pd_sx"), 150.0);
    demand.elec.insert(NodeId::from("pd_js"), 300.0);
    demand.other.insert(NodeId::from("city_js"), 900.0);
    demand.steel.insert(NodeId::from("psd_js"), 10.0);
    let mut f = assemble(nodes, links, steps, demand, Tariff::default());
    f.network.years = vec![YEAR];
    f
}

fn random_link(from: String, to: String, draw: &mut dyn FnMut() -> f64) -> Link {
    let l = Link::new(from, to, TransportMode::Rail, 1.0 + 29.0 * draw()).one_way();
    if draw() < 0.4 {
        l.with_capacity(2000, 1.0 + 9.0 * draw())
    } else {
        l
    }
}

/// A random network of at most three mines, an optional railway stop and one
/// or two cities, drawn from `draw` (uniform on [0, 1)). Costs are positive.
pub fn random_small(draw: &mut dyn FnMut() -> f64) -> Fixture {
    let n_mines = 1 + (draw() * 3.0) as usize;
    let n_cities = 1 + (draw() * 2.0) as usize;
    let with_hub = draw() < 0.3;
    let mut nodes = Vec::new();
    let mut steps = Vec::new();
    let mut links = Vec::new();
    for i in 0..n_mines {
        let id = format!("m{i}");
        nodes.push(Node::new(id.as_str(), NodeKind::Mine).at(38.0 + i as f64, 112.0).in_province("SX"));
        steps.push(thermal(&id, 1.0 + 9.0 * draw(), 20.0 + 60.0 * draw()));
    }
    if with_hub {
        nodes.push(Node::new("hub", NodeKind::RailwayStop).at(39.0, 114.0).in_province("HE"));
    }
    let mut demand = YearDemand::default();
    for k in 0..n_cities {
        let id = format!("c{k}");
        nodes.push(Node::new(id.as_str(), NodeKind::CityCenter).at(40.0, 115.0 + k as f64).in_province("HE"));
        demand.other.insert(NodeId::from(id.as_str()), pj_of(1.0 + 7.0 * draw()));
    }
    for i in 0..n_mines {
        let targets: Vec<String> = if with_hub {
            vec!["hub".to_string()]
        } else {
            (0..n_cities).map(|k| format!("c{k}")).collect()
        };
        for (t, target) in targets.into_iter().enumerate() {
            if i == 0 && t == 0 || draw() < 0.7 {
                links.push(random_link(format!("m{i}"), target, draw));
            }
        }
    }
    for k in 0..n_cities {
        let from = if with_hub { "hub".to_string() } else { "m0".to_string() };
        let city = format!("c{k}");
        if with_hub || !links.iter().any(|l| l.to.as_str() == city) {
            links.push(random_link(from, city, draw));
        }
    }
    assemble(nodes, links, steps, demand, unit_tariff())
}

/// Directory of the synthetic desk bundle shipped with the crate.
pub fn desk_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("desk")
}

/// The desk bundle, loaded.
pub fn desk() -> crate::scenarios::Bundle {
    crate::scenarios::Bundle::load(&desk_dir()).expect("desk bundle").0
}
