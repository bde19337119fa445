//! Single-year runs, demand sweeps and parallel scenario batches.

use super::depletion::{apply_depletion, depletion_screen, running_max_relax, DepletionViolation};
use super::{apply_scenario, scale_from, Bundle, Mutation, ScenarioError, ScenarioSpec, SweepSector};
use crate::demand::{DemandDiagnostics, Trajectory, YearDemand};
use crate::network::{Network, NodeKind, TransportMode};
use crate::optimizer::{
    check_solution, formulate_with, solve, Backend, FlowProblem, FlowSolution, FormulateOptions, Status, UnmetDemand,
};
use crate::report::{aggregate_by_origin, consumed_mass, Origin, OriginSupply};
use crate::supply::SupplyBook;
use crate::years::{Year, YearSeries};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub backend: Backend,
    /// Screen mines against base-year output for years after the base year.
    pub depletion: bool,
    /// Lift capacities to their ten-year running maximum.
    pub relax: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Embedded,
            depletion: true,
            relax: false,
        }
    }
}

/// Inputs of one year after all run-time adjustments, and its LP.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub network: Network,
    pub supply: SupplyBook,
    pub demand: YearDemand,
    pub diagnostics: DemandDiagnostics,
    pub problem: FlowProblem,
    pub warnings: Vec<String>,
}

/// Raises inland steel plant capacity so each inland province has at least
/// `(1 + margin)` times its steel demand. Only plants with positive capacity
/// are scaled, all by one factor per province.
fn expand_inland_steel(bundle: &Bundle, network: &mut Network, demand: &YearDemand, year: Year) -> Vec<String> {
    let mut warnings = Vec::new();
    let margin = bundle.settings.inland_steel_margin;
    for (node, d) in &demand.steel {
        let Some(province) = network.node(node).map(|n| n.province.clone()) else {
            continue;
        };
        if bundle.demand.provinces.get(&province).is_none_or(|i| i.coastal) {
            continue;
        }
        let plants: Vec<_> = network
            .nodes_of_kind(NodeKind::SteelPlant)
            .filter(|n| n.province == province && n.stpt_capa.at(year).unwrap_or(0.0) > 0.0)
            .map(|n| n.id.clone())
            .collect();
        let total: f64 = plants.iter().map(|id| network.nodes[id].stpt_capa.at(year).unwrap_or(0.0)).sum();
        if total <= 0.0 {
            warnings.push(format!("inland province {province} has steel demand but no steel capacity"));
            continue;
        }
        let need = (1.0 + margin) * d;
        if total < need {
            for id in &plants {
                let n = network.nodes.get_mut(id).expect("plant listed");
                scale_from(&mut n.stpt_capa, year, need / total);
            }
        }
    }
    warnings
}

fn cap_border_trucks(network: &mut Network, cap: f64) {
    let country = |net: &Network, id| net.node(id).map(|n| n.country.clone()).unwrap_or_default();
    let idx: Vec<usize> = (0..network.links.len())
        .filter(|&i| {
            let l = &network.links[i];
            let (a, b) = (country(network, &l.from), country(network, &l.to));
            l.mode == TransportMode::Truck && a != b && (a == "MN" || b == "MN")
        })
        .collect();
    for i in idx {
        network.links[i].transp_capa = YearSeries::constant_from(0, cap);
    }
}

fn prepare_with(bundle: &Bundle, year: Year, supply: SupplyBook) -> Result<Prepared, ScenarioError> {
    let mut network = bundle.network.clone();
    if let Some(cap) = bundle.settings.border_truck_cap {
        cap_border_trucks(&mut network, cap);
    }
    let (demand, diagnostics) = bundle.demand.demand_for(year, &network)?;
    let mut warnings = Vec::new();
    if bundle.demand.steel_shift.is_some() {
        warnings = expand_inland_steel(bundle, &mut network, &demand, year);
    }
    let options = FormulateOptions {
        prune_coking: bundle.settings.prune_coking,
        coking_mix: bundle.demand.config.coking_mix,
        ..FormulateOptions::default()
    };
    let problem = formulate_with(&network, &supply, &demand, &bundle.tariff, &bundle.premia, year, &options)?;
    Ok(Prepared {
        network,
        supply,
        demand,
        diagnostics,
        problem,
        warnings,
    })
}

/// Node demand, adjusted network and LP of `year` under `bundle`.
pub fn prepare_year(bundle: &Bundle, year: Year) -> Result<Prepared, ScenarioError> {
    prepare_with(bundle, year, bundle.supply.clone())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub message: Option<String>,
    pub unmet: Vec<UnmetDemand>,
    /// Mines taken out by the depletion screen.
    pub depleted: Vec<DepletionViolation>,
    pub relaxed: bool,
    pub balance_clean: bool,
    pub max_mass_residual: f64,
    pub max_energy_residual: f64,
    pub demand: DemandDiagnostics,
    pub warnings: Vec<String>,
}

/// Outcome of one scenario-year.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub scenario: String,
    pub year: Year,
    pub status: Status,
    /// $, when optimal.
    pub objective: Option<f64>,
    /// Mt by origin and route.
    pub supply: Vec<OriginSupply>,
    /// Coal consumed at demand nodes, Mt.
    pub demand_mass: f64,
    pub diagnostics: RunDiagnostics,
}

fn in_sector(s: &OriginSupply, sector: Option<SweepSector>) -> f64 {
    match sector {
        None => s.total(),
        Some(SweepSector::Thermal) => s.thermal,
        Some(SweepSector::Coking) => s.coking,
    }
}

impl RunResult {
    fn failed(scenario: &str, year: Year, message: String) -> Self {
        Self {
            scenario: scenario.to_string(),
            year,
            status: Status::SolverError,
            objective: None,
            supply: Vec::new(),
            demand_mass: 0.0,
            diagnostics: RunDiagnostics {
                message: Some(message),
                ..RunDiagnostics::default()
            },
        }
    }

    /// Mt per origin, routes summed; all sectors when `sector` is `None`.
    pub fn by_origin(&self, sector: Option<SweepSector>) -> BTreeMap<Origin, f64> {
        let mut out = BTreeMap::new();
        for s in &self.supply {
            *out.entry(s.origin).or_insert(0.0) += in_sector(s, sector);
        }
        out
    }

    pub fn imports(&self, sector: Option<SweepSector>) -> f64 {
        self.supply.iter().filter(|s| s.origin.is_import()).map(|s| in_sector(s, sector)).sum()
    }

    pub fn domestic(&self, sector: Option<SweepSector>) -> f64 {
        self.supply.iter().filter(|s| !s.origin.is_import()).map(|s| in_sector(s, sector)).sum()
    }

    pub fn total_supply(&self) -> f64 {
        self.supply.iter().map(OriginSupply::total).sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub prepare_ms: f64,
    pub solve_ms: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub result: RunResult,
    pub prepared: Prepared,
    pub solution: FlowSolution,
    pub timings: Timings,
}

/// Base-year run used for depletion screening and sweep baselines.
#[derive(Clone, Debug)]
pub struct BaseRun {
    pub output: RunOutput,
}

fn summarize(scenario: &str, prepared: &Prepared, solution: &FlowSolution) -> RunResult {
    let p = &prepared.problem;
    let supply = aggregate_by_origin(p, solution, &prepared.supply, &prepared.network);
    let mut diagnostics = RunDiagnostics {
        message: solution.message.clone(),
        unmet: solution.unmet.clone(),
        demand: prepared.diagnostics.clone(),
        warnings: prepared.warnings.clone(),
        ..RunDiagnostics::default()
    };
    let mut demand_mass = 0.0;
    let mut objective = None;
    if solution.is_optimal() {
        let report = check_solution(p, solution);
        diagnostics.balance_clean = report.is_clean();
        diagnostics.max_mass_residual = report.max_mass_residual;
        diagnostics.max_energy_residual = report.max_energy_residual;
        demand_mass = consumed_mass(p, solution);
        objective = Some(solution.objective);
    }
    RunResult {
        scenario: scenario.to_string(),
        year: p.year,
        status: solution.status,
        objective,
        supply,
        demand_mass,
        diagnostics,
    }
}

fn execute(
    bundle: &Bundle,
    scenario: &str,
    year: Year,
    supply: SupplyBook,
    backend: &Backend,
) -> Result<RunOutput, ScenarioError> {
    let t0 = Instant::now();
    let prepared = prepare_with(bundle, year, supply)?;
    let t1 = Instant::now();
    let solution = solve(&prepared.problem, backend);
    let t2 = Instant::now();
    let result = summarize(scenario, &prepared, &solution);
    Ok(RunOutput {
        result,
        prepared,
        solution,
        timings: Timings {
            prepare_ms: (t1 - t0).as_secs_f64() * 1e3,
            solve_ms: (t2 - t1).as_secs_f64() * 1e3,
        },
    })
}

pub fn run_base(bundle: &Bundle, scenario: &str, opts: &RunOptions) -> Result<BaseRun, ScenarioError> {
    let output = execute(bundle, scenario, bundle.base_year(), bundle.supply.clone(), &opts.backend)?;
    Ok(BaseRun { output })
}

/// One year under `bundle`. For years after the base year the depletion
/// screen uses `base` (solved here when `None`); flagged mines are zeroed
/// and the year is solved once more with them removed.
pub fn run_year_after(
    bundle: &Bundle,
    scenario: &str,
    year: Year,
    opts: &RunOptions,
    base: Option<&BaseRun>,
) -> Result<RunOutput, ScenarioError> {
    let base_year = bundle.base_year();
    let mut depleted = Vec::new();
    if opts.depletion && year > base_year {
        let owned;
        let base = match base {
            Some(b) => b,
            None => {
                owned = run_base(bundle, scenario, opts)?;
                &owned
            }
        };
        let b = &base.output;
        if b.solution.is_optimal() {
            depleted = depletion_screen(&b.prepared.problem, &b.solution, &bundle.supply, u32::from(year - base_year));
        }
    }
    let mut supply = if opts.relax {
        let flagged: BTreeSet<String> = depleted.iter().map(|v| v.mine_id.clone()).collect();
        running_max_relax(&bundle.supply, year, &flagged)
    } else {
        bundle.supply.clone()
    };
    apply_depletion(&mut supply, &depleted, year);
    let mut out = execute(bundle, scenario, year, supply, &opts.backend)?;
    out.result.diagnostics.depleted = depleted;
    out.result.diagnostics.relaxed = opts.relax;
    Ok(out)
}

pub fn run_year(bundle: &Bundle, scenario: &str, year: Year, opts: &RunOptions) -> Result<RunOutput, ScenarioError> {
    run_year_after(bundle, scenario, year, opts, None)
}

/// Runs every scenario for every year in parallel. Results come back in
/// `specs` order, then `years` order; a scenario that cannot be applied
/// fails all of its years.
pub fn run_scenarios(
    baseline: &Bundle,
    specs: &[ScenarioSpec],
    years: &[Year],
    opts: &RunOptions,
) -> Vec<Result<RunOutput, ScenarioError>> {
    specs
        .par_iter()
        .map(|spec| -> Vec<Result<RunOutput, ScenarioError>> {
            let bundle = match apply_scenario(baseline, spec) {
                Ok(b) => b,
                Err(e) => {
                    let msg = e.to_string();
                    return std::iter::once(Err(e))
                        .chain(years.iter().skip(1).map(|_| Err(ScenarioError::Spec(msg.clone()))))
                        .collect();
                }
            };
            let needs_base = opts.depletion && years.iter().any(|y| *y > bundle.base_year());
            let base = if needs_base {
                match run_base(&bundle, &spec.name, opts) {
                    Ok(b) => Some(b),
                    Err(e) => {
                        let msg = e.to_string();
                        return years.iter().map(|_| Err(ScenarioError::Spec(msg.clone()))).collect();
                    }
                }
            } else {
                None
            };
            years
                .par_iter()
                .map(|y| run_year_after(&bundle, &spec.name, *y, opts, base.as_ref()))
                .collect()
        })
        .flatten()
        .collect()
}

/// Runs above both thresholds get the running-maximum relaxation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelaxRule {
    pub min_cagr: f64,
    pub min_year: Year,
}

impl Default for RelaxRule {
    fn default() -> Self {
        Self {
            min_cagr: 0.04,
            min_year: 2030,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub sector: SweepSector,
    pub cagrs: Vec<f64>,
    pub years: Vec<Year>,
    /// Applies to thermal sweeps only.
    pub relax: Option<RelaxRule>,
}

impl SweepGrid {
    pub fn new(sector: SweepSector, cagrs: Vec<f64>) -> Self {
        Self {
            sector,
            cagrs,
            years: vec![2025, 2030],
            relax: (sector == SweepSector::Thermal).then(RelaxRule::default),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    /// Consumption growth of the swept sector.
    pub cagr: f64,
    pub result: RunResult,
    /// Import growth per origin against the modelled base year, for the
    /// swept sector. `None` when the base-year value is zero.
    pub import_cagr: BTreeMap<Origin, Option<f64>>,
    pub total_import_cagr: Option<f64>,
    /// Mt change per origin against the modelled base year.
    pub change_mt: BTreeMap<Origin, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSet {
    pub sector: SweepSector,
    pub base: RunResult,
    pub runs: Vec<SweepRun>,
}

fn growth(base: f64, now: f64, years: u32) -> Option<f64> {
    if years == 0 {
        return ((now - base).abs() <= 1e-9 * base.abs().max(1.0)).then_some(0.0);
    }
    (base > 0.0 && now >= 0.0).then(|| (now / base).powf(1.0 / f64::from(years)) - 1.0)
}

/// One solve per (rate, year), the other sector's growth pinned to zero.
/// Failed runs are kept with their status and message.
pub fn run_sweep(grid: &SweepGrid, bundle: &Bundle, opts: &RunOptions) -> Result<SweepSet, ScenarioError> {
    let name = |cagr: f64| format!("sweep_{}_{cagr:+.4}", match grid.sector {
        SweepSector::Thermal => "thermal",
        SweepSector::Coking => "coking",
    });
    let base = run_base(bundle, "sweep_base", opts)?;
    let base_year = bundle.base_year();
    let jobs: Vec<(f64, Year)> = grid.cagrs.iter().flat_map(|c| grid.years.iter().map(move |y| (*c, *y))).collect();
    let sector = Some(grid.sector);
    let base_result = base.output.result.clone();
    let base_by_origin = base_result.by_origin(sector);
    let base_imports = base_result.imports(sector);
    let runs = jobs
        .par_iter()
        .map(|&(cagr, year)| {
            let scenario = name(cagr);
            let spec = ScenarioSpec {
                name: scenario.clone(),
                description: String::new(),
                mutations: vec![Mutation::CagrOverride {
                    sector: grid.sector,
                    rate: cagr,
                }],
            };
            let result = apply_scenario(bundle, &spec).and_then(|mut b| {
                if let Trajectory::Cagr { thermal, coking } = &mut b.demand.trajectory {
                    match grid.sector {
                        SweepSector::Thermal => *coking = 0.0,
                        SweepSector::Coking => *thermal = 0.0,
                    }
                }
                let relax = grid
                    .relax
                    .is_some_and(|r| grid.sector == SweepSector::Thermal && cagr >= r.min_cagr && year >= r.min_year);
                let run_opts = RunOptions {
                    relax: opts.relax || relax,
                    ..opts.clone()
                };
                run_year_after(&b, &scenario, year, &run_opts, Some(&base))
            });
            let result = match result {
                Ok(o) => o.result,
                Err(e) => RunResult::failed(&scenario, year, e.to_string()),
            };
            let n = u32::from(year.saturating_sub(base_year));
            let now = result.by_origin(sector);
            let origins: BTreeSet<Origin> = base_by_origin.keys().chain(now.keys()).copied().collect();
            let ok = result.status == Status::Optimal;
            let mut import_cagr = BTreeMap::new();
            let mut change_mt = BTreeMap::new();
            for o in origins {
                let b = base_by_origin.get(&o).copied().unwrap_or(0.0);
                let t = now.get(&o).copied().unwrap_or(0.0);
                import_cagr.insert(o, if ok { growth(b, t, n) } else { None });
                if ok {
                    change_mt.insert(o, t - b);
                }
            }
            let total_import_cagr = if ok { growth(base_imports, result.imports(sector), n) } else { None };
            SweepRun {
                cagr,
                result,
                import_cagr,
                total_import_cagr,
                change_mt,
            }
        })
        .collect();
    Ok(SweepSet {
        sector: grid.sector,
        base: base_result,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_rules() {
        assert_eq!(growth(10.0, 10.0, 0), Some(0.0));
        assert_eq!(growth(10.0, 11.0, 0), None);
        assert!((growth(100.0, 121.0, 2).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(growth(0.0, 5.0, 6), None);
    }
}
