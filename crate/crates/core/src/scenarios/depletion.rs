//! Mine depletion screening and the running-maximum capacity relaxation.

use crate::optimizer::{FlowProblem, FlowSolution, VarKey};
use crate::supply::SupplyBook;
use crate::years::Year;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// A mine without enough reserves for `horizon` years at its modelled
/// base-year output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepletionViolation {
    pub mine_id: String,
    /// Mt
    pub reserves: f64,
    /// Mt/yr in the base-year solution.
    pub base_production: f64,
    /// Mt needed: horizon × base production.
    pub required: f64,
}

/// Modelled output per mine, Mt.
pub fn mine_production(problem: &FlowProblem, solution: &FlowSolution, supply: &SupplyBook) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    if solution.values.len() != problem.vars.len() {
        return out;
    }
    for (key, v) in problem.vars.iter().zip(&solution.values) {
        if let VarKey::Supply { node, coal, bin, .. } = key {
            if let Some(step) = supply.step_for(node, *coal, *bin) {
                *out.entry(step.mine_id.clone()).or_insert(0.0) += v;
            }
        }
    }
    out
}

/// Mines whose reserves fall short of `horizon` years of their modelled
/// base-year production. Mines that did not produce are never flagged.
pub fn depletion_screen(
    problem: &FlowProblem,
    base_solution: &FlowSolution,
    supply: &SupplyBook,
    horizon: u32,
) -> Vec<DepletionViolation> {
    let production = mine_production(problem, base_solution, supply);
    let mut reserves: BTreeMap<&str, f64> = BTreeMap::new();
    for step in &supply.steps {
        let r = reserves.entry(step.mine_id.as_str()).or_insert(f64::INFINITY);
        *r = r.min(step.reserves);
    }
    production
        .into_iter()
        .filter(|(_, p)| *p > 1e-9)
        .filter_map(|(mine, p)| {
            let r = reserves.get(mine.as_str()).copied().unwrap_or(f64::INFINITY);
            let required = f64::from(horizon) * p;
            (r < required).then_some(DepletionViolation {
                mine_id: mine,
                reserves: r,
                base_production: p,
                required,
            })
        })
        .collect()
}

/// Zeroes the capacity of every flagged mine from `year` on.
pub fn apply_depletion(supply: &mut SupplyBook, violations: &[DepletionViolation], year: Year) {
    let flagged: BTreeSet<&str> = violations.iter().map(|v| v.mine_id.as_str()).collect();
    for step in supply.steps.iter_mut().filter(|s| flagged.contains(s.mine_id.as_str())) {
        step.prod_capa.set_from(year, 0.0);
    }
}

const RUNNING_MAX_WINDOW: Year = 10;

/// Raises each step's capacity in `year` to the maximum over the ten
/// recorded years ending at `year` (or at the last recorded year, when the
/// series ends earlier), at the cost of the year that maximum was reached.
/// Steps of `depleted` mines are left alone.
pub fn running_max_relax(supply: &SupplyBook, year: Year, depleted: &BTreeSet<String>) -> SupplyBook {
    let mut out = supply.clone();
    for step in out.steps.iter_mut().filter(|s| !depleted.contains(&s.mine_id)) {
        let Some(last) = step.prod_capa.last_year() else {
            continue;
        };
        let end = year.min(last);
        let start = end.saturating_sub(RUNNING_MAX_WINDOW - 1);
        // Latest year wins ties, so constant series keep their current cost.
        let Some((peak_year, peak)) = (start..=end)
            .map(|y| (y, step.capacity(y)))
            .fold(None, |best: Option<(Year, f64)>, (y, c)| match best {
                Some((_, b)) if b > c => best,
                _ => Some((y, c)),
            })
        else {
            continue;
        };
        if peak <= step.capacity(year) {
            continue;
        }
        let cost = step.prod_cost.at(peak_year);
        step.prod_capa.set_from(year, peak);
        if let Some(c) = cost {
            step.prod_cost.set_from(year, c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::optimizer::{solve, Backend};
    use crate::years::YearSeries;

    fn screened(reserves: f64, demand_mt: f64, horizon: u32) -> Vec<DepletionViolation> {
        let mut f = fixtures::single_path(100.0, 50.0, 10.0, demand_mt);
        f.supply.steps[0].reserves = reserves;
        let p = f.formulate().unwrap();
        let s = solve(&p, &Backend::Embedded);
        depletion_screen(&p, &s, &f.supply, horizon)
    }

    #[test]
    fn rule_arithmetic() {
        let v = screened(50.0, 10.0, 6);
        assert_eq!(v.len(), 1);
        assert!((v[0].required - 60.0).abs() < 1e-6);
        assert!(screened(200.0, 10.0, 11).is_empty());
        assert!(screened(0.0, 0.0, 6).is_empty());
        assert!(screened(f64::INFINITY, 10.0, 11).is_empty());
    }

    #[test]
    fn depletion_zeroes_from_year() {
        let mut f = fixtures::single_path(100.0, 50.0, 10.0, 10.0);
        let v = vec![DepletionViolation {
            mine_id: f.supply.steps[0].mine_id.clone(),
            reserves: 1.0,
            base_production: 10.0,
            required: 60.0,
        }];
        apply_depletion(&mut f.supply, &v, 2025);
        assert_eq!(f.supply.steps[0].capacity(2024), 100.0);
        assert_eq!(f.supply.steps[0].capacity(2025), 0.0);
    }

    #[test]
    fn running_max_examples() {
        let f = fixtures::single_path(100.0, 50.0, 10.0, 10.0);
        let mut book = f.supply.clone();
        let caps = [8.0, 9.0, 10.0, 11.0, 12.0, 11.0, 10.0, 10.0, 9.0, 9.0];
        book.steps[0].prod_capa = (2015..=2024).zip(caps).collect();
        book.steps[0].prod_cost = (2015..=2024).map(|y| (y, f64::from(y - 2000))).collect();
        let relaxed = running_max_relax(&book, 2030, &BTreeSet::new());
        assert_eq!(relaxed.steps[0].capacity(2030), 12.0);
        assert_eq!(relaxed.steps[0].prod_cost.at(2030), Some(19.0));
        assert_eq!(relaxed.steps[0].capacity(2024), 9.0);

        book.steps[0].prod_capa = YearSeries::constant_from(2015, 7.0);
        let constant = running_max_relax(&book, 2030, &BTreeSet::new());
        assert_eq!(constant.steps[0].prod_capa, book.steps[0].prod_capa);
        assert_eq!(constant.steps[0].prod_cost, book.steps[0].prod_cost);

        book.steps[0].prod_capa = (2015..=2024).zip(caps).collect();
        let depleted = BTreeSet::from([book.steps[0].mine_id.clone()]);
        let skipped = running_max_relax(&book, 2030, &depleted);
        assert_eq!(skipped.steps[0].capacity(2030), 9.0);
    }
}
