//! Run directories, manifests and sweep tables.

use crate::{Ctx, Failure};
use coalnet::report::{format_value, Origin, ReportTable};
use coalnet::scenarios::{RunOptions, ScenarioSpec, SweepGrid, SweepSet};
use coalnet::Year;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Output directory of one run, always a direct child of `--out`.
pub struct RunDir {
    id: String,
    path: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path, name: &str) -> Result<Self, Failure> {
        let id = run_id(name);
        let path = root.join(&id);
        std::fs::create_dir_all(&path).map_err(|e| Failure::new(Failure::IO, format!("{}: {e}", path.display())))?;
        Ok(Self { id, path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write(&self, name: &str, body: &str) -> Result<(), Failure> {
        Ok(coalnet::report::write_file(&self.path, name, body)?)
    }

    pub fn write_manifest(&self, m: &Manifest) -> Result<(), Failure> {
        let mut body = serde_json::to_string_pretty(m).map_err(|e| Failure::new(Failure::IO, e.to_string()))?;
        body.push('\n');
        self.write("manifest.json", &body)
    }
}

/// Scenario names come from user files; anything but `[A-Za-z0-9._-]`
/// becomes `_` and leading dots are dropped so the id stays one path
/// component.
pub fn run_id(name: &str) -> String {
    let id: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') { c } else { '_' })
        .collect();
    let id = id.trim_start_matches('.');
    if id.is_empty() {
        "run".to_string()
    } else {
        id.to_string()
    }
}

#[derive(Debug, Default, Serialize)]
pub struct ManifestTimings {
    pub prepare_ms: f64,
    pub solve_ms: f64,
    /// Whole command, all runs included.
    pub wall_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct ManifestOptions {
    pub depletion: bool,
    pub relax: bool,
}

/// `manifest.json`: enough to repeat the run.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub run_id: String,
    pub command: String,
    pub version: &'static str,
    pub bundle: String,
    /// SHA-256 of the loaded baseline bundle.
    pub inputs_digest: String,
    pub scenario: ScenarioSpec,
    pub years: Vec<Year>,
    pub solver: String,
    pub options: ManifestOptions,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
    pub status: String,
    pub objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub balance_clean: Option<bool>,
    pub depleted: Vec<String>,
    pub warnings: Vec<String>,
    pub timings: ManifestTimings,
    pub files: Vec<&'static str>,
}

impl Manifest {
    pub fn new(ctx: &Ctx, command: &str, dir: &RunDir, spec: &ScenarioSpec, years: &[Year], opts: &RunOptions) -> Self {
        Self {
            run_id: dir.id.clone(),
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            bundle: ctx.bundle_dir.display().to_string(),
            inputs_digest: ctx.digest.clone(),
            scenario: spec.clone(),
            years: years.to_vec(),
            solver: ctx.backend.to_string(),
            options: ManifestOptions {
                depletion: opts.depletion,
                relax: opts.relax,
            },
            sweep: None,
            status: String::new(),
            objective: None,
            message: None,
            balance_clean: None,
            depleted: Vec::new(),
            warnings: Vec::new(),
            timings: ManifestTimings::default(),
            files: Vec::new(),
        }
    }
}

/// Long-format sweep rows: swept-sector supply, change against the
/// modelled base year and import growth, per origin. Base-year supply is
/// listed under the `sweep_base` scenario.
pub fn sweep_table(set: &SweepSet) -> ReportTable {
    let sector = Some(set.sector);
    let mut t = ReportTable::default();
    for (origin, v) in set.base.by_origin(sector) {
        t.push(&set.base.scenario, set.base.year, origin.as_str(), "", "supply", v, "Mt");
    }
    for run in &set.runs {
        let r = &run.result;
        if r.status != coalnet::optimizer::Status::Optimal {
            continue;
        }
        for (origin, v) in r.by_origin(sector) {
            t.push(&r.scenario, r.year, origin.as_str(), "", "supply", v, "Mt");
        }
        for (origin, v) in &run.change_mt {
            t.push(&r.scenario, r.year, origin.as_str(), "", "change", *v, "Mt");
        }
        for (origin, g) in &run.import_cagr {
            if let Some(g) = g {
                t.push(&r.scenario, r.year, origin.as_str(), "", "import_cagr", *g, "fraction/yr");
            }
        }
        if let Some(g) = run.total_import_cagr {
            t.push(&r.scenario, r.year, "imports", "", "import_cagr", g, "fraction/yr");
        }
    }
    t
}

/// Import growth against consumption growth, one row per run and import
/// origin plus an `imports` total row. Runs that did not solve keep their
/// status with empty values.
pub fn cagr_csv(set: &SweepSet) -> String {
    let mut out = String::from("consumption_cagr,year,status,origin,change_Mt,import_cagr\n");
    let mut runs: Vec<_> = set.runs.iter().collect();
    runs.sort_by(|a, b| a.cagr.total_cmp(&b.cagr).then(a.result.year.cmp(&b.result.year)));
    for run in runs {
        let r = &run.result;
        let ok = r.status == coalnet::optimizer::Status::Optimal;
        let cagr = format_value(run.cagr);
        for origin in Origin::ALL.into_iter().filter(|o| o.is_import()) {
            let change = run.change_mt.get(&origin).filter(|_| ok).map(|v| format_value(*v));
            let growth = run.import_cagr.get(&origin).copied().flatten().filter(|_| ok).map(format_value);
            let _ = writeln!(
                out,
                "{cagr},{},{},{},{},{}",
                r.year,
                r.status,
                origin,
                change.unwrap_or_default(),
                growth.unwrap_or_default()
            );
        }
        let total_change: f64 = run.change_mt.iter().filter(|(o, _)| o.is_import()).map(|(_, v)| v).sum();
        let _ = writeln!(
            out,
            "{cagr},{},{},imports,{},{}",
            r.year,
            r.status,
            if ok { format_value(total_change) } else { String::new() },
            run.total_import_cagr.filter(|_| ok).map(format_value).unwrap_or_default()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::run_id;

    #[test]
    fn run_ids_stay_inside_the_output_root() {
        assert_eq!(run_id("../../etc/passwd"), "_.._etc_passwd");
        assert_eq!(run_id("baseline-2019"), "baseline-2019");
        assert_eq!(run_id(".."), "run");
        assert_eq!(run_id("a/b c"), "a_b_c");
    }
}
