//! CPLEX-style LP text and solver solution files.

use super::{FlowProblem, Status};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

const TERMS_PER_LINE: usize = 4;

fn number(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

fn write_terms(out: &mut String, terms: impl Iterator<Item = (f64, String)>) {
    let mut first = true;
    for (k, (coef, name)) in terms.enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let (sign, mag) = if coef < 0.0 { ("-", -coef) } else { ("+", coef) };
        let body = if mag == 1.0 { name } else { format!("{} {name}", number(mag)) };
        if first {
            if sign == "-" {
                out.push_str(" -");
            }
            let _ = write!(out, " {body}");
            first = false;
        } else {
            let _ = write!(out, " {sign} {body}");
        }
    }
}

/// LP interchange text for `problem`. Objective coefficients are in million
/// USD per Mt, i.e. USD per tonne. Variables are non-negative, which is the
/// format's default, so the bounds section is empty.
pub fn emit_interchange(problem: &FlowProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ coalnet least-cost coal flow, year {}", problem.year);
    out.push_str("\\ objective in million USD: coefficients are USD per tonne, variables in Mt\n");
    let _ = writeln!(out, "\\ {} variables, {} constraints", problem.vars.len(), problem.rows.len());
    out.push_str("Minimize\n obj:");
    if problem.vars.is_empty() {
        out.push_str(" 0");
    } else {
        write_terms(
            &mut out,
            problem.costs.iter().zip(&problem.names).map(|(c, n)| (c / 1e6, n.clone())),
        );
    }
    out.push_str("\nSubject To\n");
    for row in &problem.rows {
        let _ = write!(out, " {}:", row.name);
        write_terms(&mut out, row.terms.iter().map(|(j, a)| (*a, problem.names[*j].clone())));
        let _ = writeln!(out, " {} {}", row.sense.as_str(), number(row.rhs));
    }
    out.push_str("Bounds\nEnd\n");
    out
}

/// Status, objective and values read from a solver's solution file.
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedSolution {
    pub status: Status,
    /// In the file's own units (million USD for our LP text).
    pub objective: Option<f64>,
    pub values: BTreeMap<String, f64>,
}

fn status_word(line: &str) -> Option<Status> {
    let l = line.to_ascii_lowercase();
    if l.contains("infeasible") {
        Some(Status::Infeasible)
    } else if l.contains("unbounded") {
        Some(Status::Unbounded)
    } else if l.contains("optimal") {
        Some(Status::Optimal)
    } else {
        None
    }
}

/// Reads HiGHS raw solution files, CBC solution files, or plain
/// `name value` listings. Values are taken from the first number following a
/// known variable name on a line, so column indices and reduced costs in the
/// CBC layout are skipped. A listing without any status line but with values
/// is taken as optimal.
pub fn parse_solution_text(text: &str, names: &[String]) -> ParsedSolution {
    let known: BTreeSet<&str> = names.iter().map(String::as_str).collect();
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    let mut status = None;
    if let Some(i) = lines.iter().position(|l| l.eq_ignore_ascii_case("model status")) {
        status = lines[i + 1..].iter().find(|l| !l.is_empty()).and_then(|l| status_word(l));
    }
    if status.is_none() {
        status = lines
            .iter()
            .filter(|l| !l.starts_with('#'))
            .find_map(|l| status_word(l));
    }
    let mut objective = None;
    let mut values = BTreeMap::new();
    for line in &lines {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if objective.is_none() && line.to_ascii_lowercase().contains("objective") {
            objective = tokens.iter().rev().find_map(|t| t.parse::<f64>().ok());
        }
        for (k, tok) in tokens.iter().enumerate() {
            if !known.contains(tok) || values.contains_key(*tok) {
                continue;
            }
            if let Some(v) = tokens[k + 1..].iter().find_map(|t| t.parse::<f64>().ok()) {
                values.insert(tok.to_string(), v);
            }
            break;
        }
    }
    let status = match status {
        Some(s) => s,
        None if !values.is_empty() => Status::Optimal,
        None => Status::SolverError,
    };
    ParsedSolution {
        status,
        objective,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::optimizer::{FlowProblem, ProblemContext};

    #[test]
    fn path_variable_costs_sixty() {
        let p = fixtures::single_path(10.0, 50.0, 10.0, 5.0).formulate().unwrap();
        let text = emit_interchange(&p);
        let obj = text.lines().find(|l| l.starts_with(" obj:")).unwrap();
        assert_eq!(obj, " obj: 50 s_mine_thermal_5500 + 10 f_mine_city_thermal_5500");
        assert!(text.contains(" sup_mine_thermal_5500: s_mine_thermal_5500 <= 10\n"));
    }

    #[test]
    fn deterministic_text() {
        let a = emit_interchange(&fixtures::canonical().formulate().unwrap());
        let b = emit_interchange(&fixtures::canonical().formulate().unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn empty_problem_has_all_sections() {
        let p = FlowProblem {
            year: 2020,
            vars: vec![],
            costs: vec![],
            names: vec![],
            rows: vec![],
            context: ProblemContext::default(),
        };
        let text = emit_interchange(&p);
        for section in ["Minimize", "Subject To", "Bounds", "End"] {
            assert!(text.lines().any(|l| l == section), "{section}");
        }
    }

    #[test]
    fn negative_terms() {
        let mut out = String::new();
        write_terms(&mut out, [(-1.0, "a".to_string()), (0.5, "b".to_string()), (-2.0, "c".to_string())].into_iter());
        assert_eq!(out, " - a + 0.5 b - 2 c");
    }

    #[test]
    fn parses_highs_raw() {
        let names = vec!["x".to_string(), "y".to_string()];
        let text = "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 12.5\n# Columns 2\nx 1.5\ny 0\n# Rows 1\nc1 1.5\n";
        let s = parse_solution_text(text, &names);
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.objective, Some(12.5));
        assert_eq!(s.values["x"], 1.5);
        assert_eq!(s.values["y"], 0.0);
    }

    #[test]
    fn parses_cbc() {
        let names = vec!["x".to_string(), "y".to_string()];
        let text = "Optimal - objective value 7.00000000\n      0 x                      2                       0\n      1 y                      1                       0\n";
        let s = parse_solution_text(text, &names);
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.objective, Some(7.0));
        assert_eq!(s.values["x"], 2.0);
        assert_eq!(s.values["y"], 1.0);
        let inf = parse_solution_text("Infeasible - objective value 0.0\n", &names);
        assert_eq!(inf.status, Status::Infeasible);
    }

    #[test]
    fn parses_plain_listing() {
        let names = vec!["x".to_string()];
        let s = parse_solution_text("x 4\n", &names);
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.values["x"], 4.0);
        assert_eq!(parse_solution_text("", &names).status, Status::SolverError);
    }
}
