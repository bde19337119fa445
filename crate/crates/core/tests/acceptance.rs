//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use coalnet::demand::{balance_adjust, forecast_offset, CokingMix, IndustryBalance, Sector};
use coalnet::fixtures::{self, desk};
use coalnet::network::{uhv_line_efficiency, Link, Network, NodeId, NodeKind, TransportMode, UhvType};
use coalnet::optimizer::{
    brute_force_oracle, check_solution, emit_interchange, solve, Backend, FlowProblem, FlowSolution, Status, VarKey,
    ORACLE_MAX_VARS,
};
use coalnet::scenarios::{
    apply_scenario, preset, preset_names, prepare_year, run_scenarios, Bundle, Mutation, RunOptions, ScenarioSpec,
};
use coalnet::supply::{
    correct_global_curve, effective_cost, energy_content, link_unit_cost_cny, CoalType, CorrectionFactors, CvBin,
    PremiumModel, Quality, Tariff, PJ_PER_TWH,
};
use coalnet::years::Year;
use lp_parser_rs::problem::LpProblem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::Instant;

type Outcome = Result<String, String>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_fixture(seed: u64) -> fixtures::Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || rng.gen::<f64>();
    fixtures::random_small(&mut draw)
}

fn oracle_equivalence() -> Outcome {
    let t0 = Instant::now();
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..200u64 {
        let p = random_fixture(seed).formulate().map_err(|e| e.to_string())?;
        if p.vars.len() > ORACLE_MAX_VARS {
            continue;
        }
        let o = brute_force_oracle(&p).map_err(|e| format!("seed {seed}: {e}"))?;
        let s = solve(&p, &Backend::Embedded);
        ensure(o.status == s.status, || format!("seed {seed}: oracle {} vs solver {}", o.status, s.status))?;
        if s.is_optimal() {
            let r = rel(o.objective, s.objective);
            worst = worst.max(r);
            ensure(r <= 1e-6, || format!("seed {seed}: objective {} vs oracle {}", s.objective, o.objective))?;
        }
        compared += 1;
        if compared == 40 {
            break;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure(compared >= 20, || format!("only {compared} fixtures within the oracle limit"))?;
    ensure(secs < 10.0, || format!("{compared} fixtures took {secs:.2} s"))?;
    Ok(format!("{compared} fixtures, worst rel gap {worst:.1e}, {secs:.2} s"))
}

fn balance_suite() -> Outcome {
    let mut problems: Vec<(String, FlowProblem)> = Vec::new();
    for seed in 0..30u64 {
        problems.push((format!("random {seed}"), random_fixture(seed).formulate().map_err(|e| e.to_string())?));
    }
    problems.push(("two_mines".into(), fixtures::two_mines(3.0, 10.0, 30.0, 40.0, 5.0).formulate().map_err(|e| e.to_string())?));
    problems.push(("steel".into(), fixtures::steel(10.0, 12.0).formulate().map_err(|e| e.to_string())?));
    problems.push(("canonical".into(), fixtures::canonical().formulate().map_err(|e| e.to_string())?));
    let b = desk();
    for y in [2019, 2025] {
        problems.push((format!("desk {y}"), prepare_year(&b, y).map_err(|e| e.to_string())?.problem));
    }
    let (mut optimal, mut uhv_checked) = (0, 0);
    let (mut mass, mut energy): (f64, f64) = (0.0, 0.0);
    for (name, p) in &problems {
        let s = solve(p, &Backend::Embedded);
        if !s.is_optimal() {
            continue;
        }
        optimal += 1;
        let r = check_solution(p, &s);
        mass = mass.max(r.max_mass_residual);
        energy = energy.max(r.max_energy_residual);
        ensure(r.max_mass_residual <= 1e-6, || format!("{name}: mass residual {}", r.max_mass_residual))?;
        ensure(r.max_energy_residual <= 1e-6, || format!("{name}: energy residual {}", r.max_energy_residual))?;
        ensure(r.is_clean(), || format!("{name}: {:?}", r.incidents))?;
        for t in &r.uhv {
            ensure((t.received - t.sent * t.efficiency).abs() <= 1e-6 * t.sent.max(1.0), || {
                format!("{name}: UHV {}->{} sent {} received {}", t.from, t.to, t.sent, t.received)
            })?;
            uhv_checked += 1;
        }
        energy_by_hand(name, p, &s)?;
    }
    ensure(uhv_checked > 0, || "no UHV arc exercised".into())?;
    Ok(format!(
        "{optimal} optimal solutions, max mass {mass:.1e} Mt, max energy {energy:.1e} PJ, {uhv_checked} UHV transfers"
    ))
}

/// Energy delivered to each power demand node recomputed from arc flows:
/// coal arcs carry mass × CV × arc efficiency, UHV arcs the same with the
/// line efficiency.
fn energy_by_hand(name: &str, p: &FlowProblem, s: &FlowSolution) -> Result<(), String> {
    let mut inflow: BTreeMap<&NodeId, f64> = BTreeMap::new();
    let mut outflow: BTreeMap<&NodeId, f64> = BTreeMap::new();
    for (key, v) in p.vars.iter().zip(&s.values) {
        if let VarKey::Flow { from, to, mode, bin, .. } = key {
            let eff = p.context.multipliers.get(&(from.clone(), to.clone(), *mode)).copied().unwrap_or(1.0);
            let pj = energy_content(*v, *bin);
            *inflow.entry(to).or_default() += pj * eff;
            if *mode == TransportMode::Uhv {
                *outflow.entry(from).or_default() += pj;
            }
        }
    }
    for (node, need) in &p.context.elec_demand {
        let net = inflow.get(node).copied().unwrap_or(0.0) - outflow.get(node).copied().unwrap_or(0.0);
        ensure(net >= need - 1e-6, || format!("{name}: {node} receives {net} PJ for {need}"))?;
    }
    Ok(())
}

fn coking_mix() -> Outcome {
    let mix = CokingMix::STANDARD;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let plant_caps = |net: &Network, y: Year| -> BTreeMap<NodeId, f64> {
        net.nodes_of_kind(NodeKind::SteelPlant)
            .map(|n| (n.id.clone(), n.stpt_capa.at(y).unwrap_or(0.0)))
            .collect()
    };
    let fixture_case = |name: String, f: fixtures::Fixture| -> Result<(String, FlowProblem, BTreeMap<NodeId, f64>), String> {
        let caps = plant_caps(&f.network, f.year);
        Ok((name, f.formulate().map_err(|e| e.to_string())?, caps))
    };
    let mut cases = Vec::new();
    for i in 0..10 {
        let steel = rng.gen_range(1.0..40.0);
        let cap = steel * mix.total() / 0.966 * rng.gen_range(1.0..1.5) + 1e-6;
        cases.push(fixture_case(format!("steel fixture {i}"), fixtures::steel(steel, cap))?);
    }
    cases.push(fixture_case("canonical".into(), fixtures::canonical())?);
    let prepared = prepare_year(&desk(), 2019).map_err(|e| e.to_string())?;
    cases.push(("desk 2019".into(), prepared.problem, plant_caps(&prepared.network, 2019)));
    let mut worst: f64 = 0.0;
    let mut nodes = 0;
    for (name, p, caps) in &cases {
        let s = solve(p, &Backend::Embedded);
        ensure(s.is_optimal(), || format!("{name}: {}", s.status))?;
        let mut delivered: BTreeMap<&NodeId, [f64; 3]> = BTreeMap::new();
        let mut plant_in: BTreeMap<&NodeId, f64> = BTreeMap::new();
        for (key, v) in p.vars.iter().zip(&s.values) {
            let VarKey::Flow { to, coal, .. } = key else { continue };
            let slot = match coal {
                CoalType::Hcc => 0,
                CoalType::Scc => 1,
                CoalType::Pci => 2,
                CoalType::Thermal => continue,
            };
            match p.context.kinds.get(to) {
                Some(NodeKind::ProvSteelDemand) => delivered.entry(to).or_default()[slot] += v,
                Some(NodeKind::SteelPlant) => *plant_in.entry(to).or_default() += v,
                _ => {}
            }
        }
        for (node, steel) in &p.context.steel_demand {
            let d = delivered.get(node).copied().unwrap_or_default();
            for (got, want) in d.iter().zip([mix.hcc, mix.scc, mix.pci]) {
                let r = rel(*got, want * steel);
                worst = worst.max(r);
                ensure(r <= 1e-9, || format!("{name} {node}: delivered {d:?} for {steel} Mt steel"))?;
            }
            nodes += 1;
        }
        for (plant, inflow) in &plant_in {
            let cap = caps.get(*plant).copied().unwrap_or(0.0);
            ensure(*inflow <= 0.966 * cap * (1.0 + 1e-9) + 1e-9, || format!("{name} {plant}: {inflow} > 0.966 × {cap}"))?;
        }
    }
    Ok(format!("{nodes} steel demand nodes, worst rel error {worst:.1e}"))
}

fn unit_anchor() -> Outcome {
    let b5000 = CvBin::new(5000).ok_or("no 5000 bin")?;
    let one = energy_content(1.0, b5000);
    ensure((one - 20.934).abs() <= 1e-6, || format!("1 Mt @5000 = {one} PJ"))?;
    let pj = 3849.0 * PJ_PER_TWH;
    ensure((13855.0..=13857.0).contains(&pj), || format!("3849 TWh = {pj} PJ"))?;
    Ok(format!("1 Mt @5000 kcal/kg = {one:.6} PJ; 3849 TWh = {pj:.1} PJ"))
}

fn tariff_anchors() -> Outcome {
    let t = Tariff::default();
    let rail = Link::new("a", "b", TransportMode::Rail, 500.0);
    let national = link_unit_cost_cny(&rail, NodeKind::RailwayStop, NodeKind::PowerPlant, &t).map_err(|e| e.to_string())?;
    let haoji = link_unit_cost_cny(&rail.clone().on_line("Haoji"), NodeKind::RailwayStop, NodeKind::RailwayStop, &t)
        .map_err(|e| e.to_string())?;
    let eff = uhv_line_efficiency(UhvType::Dc, 2000.0).map_err(|e| e.to_string())?;
    ensure((national - 81.8).abs() <= 1e-9, || format!("rail 500 km = {national}"))?;
    ensure((haoji - 92.0).abs() <= 1e-9, || format!("Haoji 500 km = {haoji}"))?;
    ensure((eff - 0.944).abs() <= 1e-9, || format!("UHV DC 2000 km = {eff}"))?;
    Ok(format!("rail {national} CNY/t, Haoji {haoji} CNY/t, UHV DC {eff}"))
}

fn supply_correction() -> Outcome {
    let cv = |k| Quality::Cv(CvBin::new(k).expect("bin"));
    let curve = vec![
        fixtures::step("cn", "cn", "CN", CoalType::Thermal, cv(5500), 200.0, 35.0),
        fixtures::step("au", "au", "AU", CoalType::Thermal, cv(6000), 100.0, 45.0),
        fixtures::step("za", "za", "ZA", CoalType::Thermal, cv(6000), 100.0, 55.0),
        fixtures::step("au_hcc", "au", "AU", CoalType::Hcc, Quality::Csr(65.0), 50.0, 150.0),
    ];
    let out = correct_global_curve(&curve, &CorrectionFactors::default()).map_err(|e| e.to_string())?;
    let y = fixtures::YEAR;
    let factor = |i: usize| out[i].capacity(y) / curve[i].capacity(y);
    ensure(rel(factor(0), 1.0) <= 1e-12, || format!("domestic scaled by {}", factor(0)))?;
    ensure(rel(factor(1), 0.241) <= 1e-12, || format!("Australia thermal ×{}", factor(1)))?;
    ensure(rel(factor(2), 0.014) <= 1e-12, || format!("rest of world thermal ×{}", factor(2)))?;
    let premia = PremiumModel::default();
    let order = |steps: &[coalnet::supply::SupplyStep]| {
        let mut idx: Vec<usize> = (0..steps.len()).collect();
        idx.sort_by(|a, b| {
            let c = |i: usize| effective_cost(&steps[i], y, &premia).unwrap_or(f64::INFINITY);
            c(*a).total_cmp(&c(*b))
        });
        idx
    };
    ensure(order(&curve) == order(&out), || "merit order changed".into())?;
    Ok(format!("AU ×{:.3}, rest of world ×{:.3}, merit order kept", factor(1), factor(2)))
}

fn forecast_offsets() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let k = rng.gen_range(1..30);
        let base: BTreeMap<String, f64> = (0..k).map(|j| (format!("p{j}"), rng.gen_range(0.5..800.0))).collect();
        let growth: BTreeMap<String, f64> = (0..k).map(|j| (format!("p{j}"), rng.gen_range(-0.06..0.12))).collect();
        let n = rng.gen_range(1..12);
        let target = base.values().sum::<f64>() * rng.gen_range(0.5..1.8);
        let o = forecast_offset(&base, &growth, n, target).map_err(|e| format!("fixture {i}: {e}"))?;
        let r = rel(o.projected.values().sum(), target);
        worst = worst.max(r);
        ensure(r <= 1e-9, || format!("fixture {i}: off by {r:e}"))?;
    }
    let base = BTreeMap::from([("GD".to_string(), 100.0), ("XJ".to_string(), 40.0)]);
    let growth = BTreeMap::from([("GD".to_string(), 0.022), ("XJ".to_string(), 0.088)]);
    let n = 6;
    let target = 100.0 * 1.002f64.powi(n) + 40.0 * 1.068f64.powi(n);
    let o = forecast_offset(&base, &growth, n as u32, target).map_err(|e| e.to_string())?;
    ensure((o.delta + 0.02).abs() <= 1e-9, || format!("delta {}", o.delta))?;
    ensure((o.rates["GD"] - 0.002).abs() <= 1e-9, || format!("GD {}", o.rates["GD"]))?;
    ensure((o.rates["XJ"] - 0.068).abs() <= 1e-9, || format!("XJ {}", o.rates["XJ"]))?;
    Ok(format!(
        "100 fixtures, worst rel {worst:.1e}; GD {:.1}%, XJ {:.1}% at delta {:.1} points",
        o.rates["GD"] * 100.0,
        o.rates["XJ"] * 100.0,
        o.delta * 100.0
    ))
}

fn balance_ledger() -> Outcome {
    let table = IndustryBalance {
        year: 2019,
        pj: BTreeMap::from([
            (Sector::PowerGen, 40467.0),
            (Sector::BuildingMaterials, 6708.0),
            (Sector::Chemicals, 4474.0),
            (Sector::Heating, 5636.0),
            (Sector::Other, 7568.0),
        ]),
    };
    let power_pj = 16898.0;
    let out = balance_adjust(&table, power_pj, 0.3569, 782.5, &CokingMix::STANDARD).map_err(|e| e.to_string())?;
    let other = out.pj[&Sector::Other];
    let total = out.total();
    ensure((out.implied_power - 47346.0).abs() <= 2.0, || format!("implied power {}", out.implied_power))?;
    ensure((other - 689.0).abs() <= 2.0, || format!("other {other}"))?;
    ensure((total - 64852.0).abs() <= 2.0, || format!("total {total}"))?;
    Ok(format!("implied power {:.1}, other {other:.1}, total {total:.1} PJ", out.implied_power))
}

fn capacities(b: &Bundle, years: &[Year]) -> Vec<f64> {
    let mut out = Vec::new();
    for l in &b.network.links {
        for y in years {
            out.push(l.transp_capa.at(*y).unwrap_or(f64::INFINITY));
            out.push(l.elec_capa.at(*y).unwrap_or(f64::INFINITY));
        }
    }
    for n in b.network.nodes.values() {
        for y in years {
            out.push(n.port_capa.at(*y).unwrap_or(f64::INFINITY));
        }
    }
    out
}

fn steel_capacity(b: &Bundle, y: Year) -> f64 {
    b.network.nodes_of_kind(NodeKind::SteelPlant).map(|n| n.stpt_capa.at(y).unwrap_or(0.0)).sum()
}

fn scenario_suite() -> Outcome {
    let years: Vec<Year> = (2015..=2030).collect();
    let b = desk();
    let digest = b.digest();
    for name in preset_names() {
        let spec = preset(name).map_err(|e| e.to_string())?;
        let out = apply_scenario(&b, &spec).map_err(|e| format!("{name}: {e}"))?;
        ensure(b.digest() == digest, || format!("{name} changed the baseline"))?;
        let again = apply_scenario(&b, &spec).map_err(|e| e.to_string())?;
        ensure(out.digest() == again.digest(), || format!("{name} not deterministic"))?;
        for m in &spec.mutations {
            match m {
                Mutation::FreezeInfra { .. } => {
                    let (lo, hi) = (capacities(&out, &years), capacities(&b, &years));
                    ensure(lo.iter().zip(&hi).all(|(a, c)| a <= c), || format!("{name}: freeze raised a capacity"))?;
                }
                Mutation::SteelToPorts { .. } => {
                    for y in &years {
                        ensure(rel(steel_capacity(&out, *y), steel_capacity(&b, *y)) <= 1e-9, || {
                            format!("{name}: steel capacity changed in {y}")
                        })?;
                    }
                }
                Mutation::SteelSplit { .. } => {
                    for y in [2019, 2025] {
                        let d = |x: &Bundle| prepare_year(x, y).map(|p| p.demand.total_steel());
                        let (a, c) = (d(&out).map_err(|e| e.to_string())?, d(&b).map_err(|e| e.to_string())?);
                        ensure(rel(a, c) <= 1e-9, || format!("{name}: national steel {a} vs {c} in {y}"))?;
                    }
                }
                _ => {}
            }
        }
    }
    let specs: Vec<ScenarioSpec> = preset_names().map(|n| preset(n).expect("preset")).collect();
    let t0 = Instant::now();
    let run_years = [2019, 2025, 2030];
    let results = run_scenarios(&b, &specs, &run_years, &RunOptions::default());
    let secs = t0.elapsed().as_secs_f64();
    let mut worst: f64 = 0.0;
    for r in &results {
        let r = &r.as_ref().map_err(|e| e.to_string())?.result;
        ensure(r.status == Status::Optimal, || format!("{} {}: {}", r.scenario, r.year, r.status))?;
        let gap = rel(r.total_supply(), r.demand_mass);
        worst = worst.max(gap);
        ensure(gap <= 1e-6, || format!("{} {}: origins {} vs demand {}", r.scenario, r.year, r.total_supply(), r.demand_mass))?;
    }
    ensure(secs < 60.0, || format!("suite took {secs:.1} s"))?;
    Ok(format!(
        "{} presets × {} years optimal in {secs:.1} s, cross-foot {worst:.1e}",
        specs.len(),
        run_years.len()
    ))
}

fn interchange_golden() -> Outcome {
    let a = emit_interchange(&fixtures::canonical().formulate().map_err(|e| e.to_string())?);
    let b = emit_interchange(&fixtures::canonical().formulate().map_err(|e| e.to_string())?);
    ensure(a == b, || "two emissions differ".into())?;
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/canonical.lp");
    let golden = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    ensure(a == golden, || "emission differs from the golden file".into())?;
    let parsed = LpProblem::parse(&a).map_err(|e| format!("external parse: {e}"))?;
    let p = fixtures::canonical().formulate().map_err(|e| e.to_string())?;
    ensure(parsed.constraint_count() == p.rows.len() && parsed.variable_count() == p.vars.len(), || {
        format!("parsed {} rows / {} vars", parsed.constraint_count(), parsed.variable_count())
    })?;
    Ok(format!("{} bytes, byte-stable, parsed by lp_parser_rs", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("balance suite", balance_suite),
        ("coking mix", coking_mix),
        ("unit anchor", unit_anchor),
        ("tariff anchors", tariff_anchors),
        ("supply-curve correction", supply_correction),
        ("forecast offset", forecast_offsets),
        ("balance adjustment", balance_ledger),
        ("scenario determinism and isolation", scenario_suite),
        ("LP interchange golden file", interchange_golden),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
