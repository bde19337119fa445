//! Scenario mutations over a baseline input bundle, demand sweeps, mine
//! depletion screening and calibration runs.

mod calibrate;
mod depletion;
mod mutate;
mod run;

pub use calibrate::{calibrate, calibration_report, load_actuals, Actual, CalibrationReport, CalibrationRow};
pub use depletion::{apply_depletion, depletion_screen, mine_production, running_max_relax, DepletionViolation};
pub use mutate::{apply_scenario, preset, preset_names, InfraKind, Mutation, ScenarioSpec, SweepSector, STEEL_PORT_PROVINCES};
pub use run::{
    prepare_year, run_base, run_scenarios, run_sweep, run_year, run_year_after, BaseRun, Prepared, RelaxRule,
    RunDiagnostics, RunOptions, RunOutput, RunResult, SweepGrid, SweepRun, SweepSet, Timings,
};

use crate::demand::{DemandError, DemandModel, DemandPreset, Trajectory};
use crate::io::{parse_toml, read_table, IoError};
use crate::network::{io::load_network, validate, NetworkError, NodeId, NodeKind};
use crate::optimizer::OptimizerError;
use crate::supply::{
    correct_global_curve, load_supply, CorrectionFactors, PremiumModel, SupplyBook, SupplyError, Tariff,
};
use crate::years::{Year, YearSeries};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{mutation}: absent assets: {}", assets.join(", "))]
    AbsentAssets { mutation: String, assets: Vec<String> },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("scenario file: {0}")]
    Spec(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Supply(#[from] SupplyError),
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl ScenarioError {
    /// True for failures reading files, as opposed to bad content.
    pub fn is_io(&self) -> bool {
        let io = IoError::is_io;
        match self {
            ScenarioError::Io(e) => io(e),
            ScenarioError::Network(NetworkError::Io(e)) => io(e),
            ScenarioError::Supply(SupplyError::Io(e)) => io(e),
            ScenarioError::Demand(DemandError::Io(e)) => io(e),
            _ => false,
        }
    }
}

/// Run-level settings read from the `[settings]` table of `model.toml`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    /// Years the network is built for; the first also dates UHV lines
    /// without a start year.
    pub years: Vec<Year>,
    /// Map CVs above the top bin to the top bin instead of rejecting them.
    pub clamp_high_cv: bool,
    pub prune_coking: bool,
    /// Capacity of truck links crossing the Mongolian border, Mt/yr.
    /// Unbounded when absent.
    pub border_truck_cap: Option<f64>,
    /// Ports frozen by the port-expansion counterfactual; all ports when
    /// empty.
    pub key_ports: Vec<NodeId>,
    /// Minimum capacity margin of inland steel plants over provincial
    /// demand when steel moves inland.
    pub inland_steel_margin: f64,
    /// National trajectory after the base year; only historical years can
    /// be run when absent.
    pub demand_preset: Option<DemandPreset>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            years: (2015..=2030).collect(),
            clamp_high_cv: false,
            prune_coking: false,
            border_truck_cap: None,
            key_ports: Vec::new(),
            inland_steel_margin: 0.05,
            demand_preset: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
struct ModelFile {
    settings: Settings,
    tariff: Tariff,
    premia: PremiumModel,
    correction: Option<CorrectionFactors>,
}

/// One row of a mine expansion table. Either `total` replaces the mine's
/// capacity from `from_year`, or `added` is put on top of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub mine_id: String,
    pub country: String,
    /// e.g. `committed`, `feasible`
    pub status: String,
    pub from_year: Year,
    pub added: Option<f64>,
    pub total: Option<f64>,
    /// $/t from `from_year`; costs are kept when absent.
    pub cost: Option<f64>,
}

/// Everything one model run reads. Scenarios produce modified copies.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bundle {
    pub network: crate::network::Network,
    pub supply: SupplyBook,
    pub demand: DemandModel,
    pub tariff: Tariff,
    pub premia: PremiumModel,
    /// Expansion tables by name (`expansions/<name>.csv`).
    pub expansions: BTreeMap<String, Vec<Expansion>>,
    /// Factors already applied to the foreign supply steps; expansions of
    /// foreign mines are scaled by the same factors.
    pub correction: Option<CorrectionFactors>,
    pub settings: Settings,
}

impl Bundle {
    /// Reads a bundle directory:
    ///
    /// ```text
    /// model.toml            settings, tariff, premia, correction (all optional)
    /// network/              nodes.csv, links.csv, uhv.csv
    /// supply.csv
    /// demand/               see DemandModel::load
    /// expansions/*.csv      optional
    /// ```
    pub fn load(dir: &Path) -> Result<(Bundle, Vec<String>), ScenarioError> {
        if !dir.is_dir() {
            return Err(IoError::io(dir, std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory")).into());
        }
        let model_path = dir.join("model.toml");
        let model: ModelFile = if model_path.exists() {
            parse_toml(&model_path)?
        } else {
            ModelFile::default()
        };
        model.tariff.check()?;
        model.premia.check()?;
        let mut warnings = Vec::new();
        let (network, w) = load_network(&dir.join("network"), model.settings.years.clone())?;
        warnings.extend(w);
        let (mut supply, w) = load_supply(&dir.join("supply.csv"), model.settings.clamp_high_cv)?;
        warnings.extend(w);
        if let Some(factors) = &model.correction {
            supply = SupplyBook::new(correct_global_curve(&supply.steps, factors)?)?;
        }
        let (mut demand, w) = DemandModel::load(&dir.join("demand"))?;
        warnings.extend(w);
        if let Some(p) = model.settings.demand_preset {
            demand.trajectory = Trajectory::Preset(p);
        }
        let mut expansions = BTreeMap::new();
        let exp_dir = dir.join("expansions");
        if exp_dir.is_dir() {
            let entries = std::fs::read_dir(&exp_dir).map_err(|e| IoError::io(&exp_dir, e))?;
            let mut files: Vec<_> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            files.sort();
            for path in files {
                let name = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
                let (rows, w) = load_expansions(&path)?;
                warnings.extend(w);
                expansions.insert(name, rows);
            }
        }
        Ok((
            Bundle {
                network,
                supply,
                demand,
                tariff: model.tariff,
                premia: model.premia,
                expansions,
                correction: model.correction,
                settings: model.settings,
            },
            warnings,
        ))
    }

    /// SHA-256 over the full bundle content. Two bundles with equal digests
    /// produce identical runs with the embedded solver.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{self:?}").as_bytes());
        hex::encode(h.finalize())
    }

    /// Cross-file checks: network invariants, supply steps on mine nodes,
    /// expansion rows naming known mines. Empty when clean.
    pub fn validate(&self) -> Vec<String> {
        let mut out: Vec<String> = validate(&self.network).violations.iter().map(|v| v.to_string()).collect();
        for step in &self.supply.steps {
            match self.network.kind_of(&step.node) {
                None => out.push(format!("supply step {}: node `{}` not in network", step.mine_id, step.node)),
                Some(NodeKind::Mine) => {}
                Some(k) => out.push(format!("supply step {}: node `{}` is a {k}, not a mine", step.mine_id, step.node)),
            }
        }
        for (table, rows) in &self.expansions {
            for row in rows {
                if self.supply.by_mine(&row.mine_id).next().is_none() {
                    out.push(format!("expansion table {table}: unknown mine `{}`", row.mine_id));
                }
            }
        }
        for id in &self.settings.key_ports {
            if self.network.kind_of(id) != Some(NodeKind::Port) {
                out.push(format!("settings.key_ports: `{id}` is not a port"));
            }
        }
        out
    }

    pub fn base_year(&self) -> Year {
        self.demand.base_year()
    }
}

fn load_expansions(path: &Path) -> Result<(Vec<Expansion>, Vec<String>), ScenarioError> {
    let mut rows = Vec::new();
    let cols = ["mine_id", "country", "status", "from_year", "added_Mt", "total_Mt", "cost"];
    let w = read_table(path, &cols, &[], |row| {
        let from_year: Year = row
            .required("from_year")?
            .parse()
            .map_err(|_| row.err("bad from_year"))?;
        let added = row.f64_opt("added_Mt")?;
        let total = row.f64_opt("total_Mt")?;
        if added.is_some() == total.is_some() {
            return Err(row.err("give exactly one of added_Mt and total_Mt"));
        }
        if added.or(total).is_some_and(|v| v < 0.0) {
            return Err(row.err("negative expansion"));
        }
        rows.push(Expansion {
            mine_id: row.required("mine_id")?.to_string(),
            country: row.required("country")?.to_string(),
            status: row.get("status").unwrap_or("").to_string(),
            from_year,
            added,
            total,
            cost: row.f64_opt("cost")?,
        });
        Ok(())
    })?;
    Ok((rows, w))
}

/// Multiplies the values of `series` in force from `year` on by `factor`,
/// keeping earlier years.
pub(crate) fn scale_from(series: &mut YearSeries, year: Year, factor: f64) {
    let mut out: YearSeries = series.iter().filter(|(y, _)| *y < year).collect();
    out.set(year, series.at(year).unwrap_or(0.0) * factor);
    for (y, v) in series.iter().filter(|(y, _)| *y > year) {
        out.set(y, v * factor);
    }
    *series = out;
}
