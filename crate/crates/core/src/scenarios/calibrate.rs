//! Historical runs compared with reported imports.

use super::{run_year, Bundle, RunOptions, RunResult, ScenarioError};
use crate::io::read_table;
use crate::report::{format_value, Origin, ReportTable};
use crate::years::Year;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// Reported imports of one origin in one year, Mt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Actual {
    pub year: Year,
    pub origin: Origin,
    pub imports: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub year: Year,
    pub origin: Origin,
    pub modelled: f64,
    pub actual: f64,
    /// actual − modelled, Mt
    pub abs_gap: f64,
    /// (actual − modelled) / modelled; `None` when nothing was modelled.
    pub rel_gap: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub rows: Vec<CalibrationRow>,
    /// Years whose run did not solve, with the reason.
    pub failed: BTreeMap<Year, String>,
}

impl CalibrationReport {
    pub fn to_table(&self) -> ReportTable {
        let mut t = ReportTable::default();
        for r in &self.rows {
            let o = r.origin.as_str();
            t.push("calibration", r.year, o, "", "modelled_imports", r.modelled, "Mt");
            t.push("calibration", r.year, o, "", "actual_imports", r.actual, "Mt");
            t.push("calibration", r.year, o, "", "abs_gap", r.abs_gap, "Mt");
            if let Some(g) = r.rel_gap {
                t.push("calibration", r.year, o, "", "rel_gap", g, "fraction");
            }
        }
        t
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("year,origin,modelled_Mt,actual_Mt,abs_gap_Mt,rel_gap\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.year,
                r.origin,
                format_value(r.modelled),
                format_value(r.actual),
                format_value(r.abs_gap),
                r.rel_gap.map(format_value).unwrap_or_default()
            ));
        }
        out
    }
}

/// Reads `year,origin,imports_Mt` rows. Origins are names or two-letter
/// country codes.
pub fn load_actuals(path: &Path) -> Result<Vec<Actual>, ScenarioError> {
    let mut out = Vec::new();
    read_table(path, &["year", "origin", "imports_Mt"], &[], |row| {
        let year: Year = row.required("year")?.parse().map_err(|_| row.err("bad year"))?;
        let origin: Origin = row.required("origin")?.parse().map_err(|e: String| row.err(e))?;
        out.push(Actual {
            year,
            origin,
            imports: row.f64("imports_Mt")?,
        });
        Ok(())
    })?;
    Ok(out)
}

/// One row per (year, import origin) for every optimal run. Missing actuals
/// count as zero.
pub fn calibration_report(results: &[RunResult], actuals: &[Actual]) -> CalibrationReport {
    let mut actual: BTreeMap<(Year, Origin), f64> = BTreeMap::new();
    for a in actuals {
        *actual.entry((a.year, a.origin)).or_insert(0.0) += a.imports;
    }
    let mut report = CalibrationReport::default();
    for r in results {
        if !r.status.eq(&crate::optimizer::Status::Optimal) {
            let why = r.diagnostics.message.clone().unwrap_or_else(|| r.status.to_string());
            report.failed.insert(r.year, why);
            continue;
        }
        let modelled = r.by_origin(None);
        for origin in Origin::ALL.into_iter().filter(|o| o.is_import()) {
            let m = modelled.get(&origin).copied().unwrap_or(0.0);
            let a = actual.get(&(r.year, origin)).copied().unwrap_or(0.0);
            let abs_gap = a - m;
            let rel_gap = if m > 0.0 {
                Some(abs_gap / m)
            } else if a == 0.0 {
                Some(0.0)
            } else {
                None
            };
            report.rows.push(CalibrationRow {
                year: r.year,
                origin,
                modelled: m,
                actual: a,
                abs_gap,
                rel_gap,
            });
        }
    }
    report
}

/// Solves each historical year and compares imports with `actuals`.
pub fn calibrate(
    bundle: &Bundle,
    years: &[Year],
    actuals: &[Actual],
    opts: &RunOptions,
) -> Result<CalibrationReport, ScenarioError> {
    let opts = RunOptions {
        depletion: false,
        relax: false,
        ..opts.clone()
    };
    let results: Vec<RunResult> = years
        .par_iter()
        .map(|y| run_year(bundle, "calibration", *y, &opts).map(|o| o.result))
        .collect::<Result<_, _>>()?;
    Ok(calibration_report(&results, actuals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizer::Status;
    use crate::report::{OriginSupply, Route};

    fn result(year: Year, au: f64, id: f64) -> RunResult {
        RunResult {
            scenario: "c".into(),
            year,
            status: Status::Optimal,
            objective: Some(1.0),
            supply: vec![
                OriginSupply { origin: Origin::China, route: Route::Domestic, thermal: 100.0, coking: 0.0 },
                OriginSupply { origin: Origin::Australia, route: Route::Seaborne, thermal: au, coking: 0.0 },
                OriginSupply { origin: Origin::Indonesia, route: Route::Seaborne, thermal: id, coking: 0.0 },
            ],
            demand_mass: 100.0 + au + id,
            diagnostics: Default::default(),
        }
    }

    #[test]
    fn identical_actuals_give_zero_gaps() {
        let results: Vec<RunResult> = (2015..=2019).map(|y| result(y, 10.0, 20.0)).collect();
        let actuals: Vec<Actual> = results
            .iter()
            .flat_map(|r| {
                r.by_origin(None)
                    .into_iter()
                    .filter(|(o, _)| o.is_import())
                    .map(move |(origin, imports)| Actual { year: r.year, origin, imports })
            })
            .collect();
        let rep = calibration_report(&results, &actuals);
        assert_eq!(rep.rows.len(), 5 * 7);
        assert!(rep.rows.iter().all(|r| r.abs_gap == 0.0 && r.rel_gap == Some(0.0)));
    }

    #[test]
    fn ten_percent_above_model() {
        let results = vec![result(2019, 10.0, 20.0)];
        let actuals = vec![
            Actual { year: 2019, origin: Origin::Australia, imports: 11.0 },
            Actual { year: 2019, origin: Origin::Indonesia, imports: 22.0 },
        ];
        let rep = calibration_report(&results, &actuals);
        let au = rep.rows.iter().find(|r| r.origin == Origin::Australia).unwrap();
        assert!((au.rel_gap.unwrap() - 0.1).abs() < 1e-12);
        assert!((au.abs_gap - 1.0).abs() < 1e-12);
        assert!(!rep.to_csv().contains("NaN"));
    }
}
