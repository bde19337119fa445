use super::lpfile::{emit_interchange, parse_solution_text};
use super::{Family, FlowProblem, FlowSolution, OptimizerError, Sense, Status, UnmetDemand};
use log::{debug, warn};
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use std::fmt;
use std::process::Command;
use std::str::FromStr;

/// Environment variable naming the default backend.
pub const SOLVER_ENV: &str = "COALNET_SOLVER";

/// Costs are handed to solvers in million USD per Mt.
const COST_SCALE: f64 = 1e-6;

/// Penalty per unit of unserved demand in the elastic re-solve, in scaled
/// cost units.
const SHORTFALL_PENALTY: f64 = 1e5;

/// Elastic diagnosis is skipped for external runs above this size.
const DIAGNOSE_MAX_VARS: usize = 20_000;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Backend {
    #[default]
    Embedded,
    /// Shell command template with `{input}` and `{output}` placeholders.
    External(String),
}

impl FromStr for Backend {
    type Err = OptimizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("embedded") {
            return Ok(Backend::Embedded);
        }
        match s.strip_prefix("external:") {
            Some(cmd) if cmd.contains("{input}") && cmd.contains("{output}") => Ok(Backend::External(cmd.to_string())),
            Some(_) => Err(OptimizerError::Solver(
                "external command needs {input} and {output} placeholders".into(),
            )),
            None => Err(OptimizerError::Solver(format!("unknown backend `{s}`"))),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Embedded => f.write_str("embedded"),
            Backend::External(cmd) => write!(f, "external:{cmd}"),
        }
    }
}

impl Backend {
    /// Backend named by `COALNET_SOLVER`, embedded when unset.
    pub fn from_env() -> Result<Self, OptimizerError> {
        match std::env::var(SOLVER_ENV) {
            Ok(v) if !v.trim().is_empty() => v.parse(),
            _ => Ok(Backend::Embedded),
        }
    }
}

pub fn solve(problem: &FlowProblem, backend: &Backend) -> FlowSolution {
    match backend {
        Backend::Embedded => embedded(problem),
        Backend::External(cmd) => external(problem, cmd),
    }
}

fn op(sense: Sense) -> ComparisonOp {
    match sense {
        Sense::Le => ComparisonOp::Le,
        Sense::Ge => ComparisonOp::Ge,
        Sense::Eq => ComparisonOp::Eq,
    }
}

fn is_demand_row(family: Family, rhs: f64) -> bool {
    matches!(family, Family::EnergyBalance | Family::Hcc) && rhs > 0.0
}

struct Run {
    values: Vec<f64>,
    objective: f64,
    shortfalls: Vec<(usize, f64)>,
}

fn run_microlp(problem: &FlowProblem, elastic: bool) -> Result<Run, microlp::Error> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = problem
        .costs
        .iter()
        .map(|c| lp.add_var(c * COST_SCALE, (0.0, f64::INFINITY)))
        .collect();
    let mut slack_vars = Vec::new();
    for (r, row) in problem.rows.iter().enumerate() {
        let mut expr: Vec<_> = row.terms.iter().map(|(j, a)| (vars[*j], *a)).collect();
        if elastic && is_demand_row(row.family, row.rhs) {
            let u = lp.add_var(SHORTFALL_PENALTY, (0.0, f64::INFINITY));
            expr.push((u, 1.0));
            slack_vars.push((r, u));
        }
        lp.add_constraint(expr, op(row.sense), row.rhs);
    }
    let outcome = lp.solve()?;
    let solution = outcome
        .solution()
        .ok_or_else(|| microlp::Error::InternalError("solve interrupted".into()))?;
    let values = vars
        .iter()
        .map(|v| {
            let x = solution.var_value(*v);
            if x < 0.0 && x > -1e-9 {
                0.0
            } else {
                x
            }
        })
        .collect();
    let shortfalls = slack_vars.iter().map(|(r, u)| (*r, solution.var_value(*u))).collect();
    Ok(Run {
        values,
        objective: solution.objective() / COST_SCALE,
        shortfalls,
    })
}

/// Demand rows left unserved when shortfalls are allowed at a penalty.
fn diagnose(problem: &FlowProblem) -> Vec<UnmetDemand> {
    match run_microlp(problem, true) {
        Ok(run) => run
            .shortfalls
            .into_iter()
            .filter(|(_, s)| *s > 1e-6)
            .map(|(r, shortfall)| {
                let row = &problem.rows[r];
                UnmetDemand {
                    node: row.node.clone().unwrap_or_default(),
                    family: row.family,
                    shortfall,
                }
            })
            .collect(),
        Err(e) => {
            warn!("elastic re-solve failed: {e}");
            Vec::new()
        }
    }
}

fn embedded(problem: &FlowProblem) -> FlowSolution {
    debug!("embedded solve: {} vars, {} rows", problem.vars.len(), problem.rows.len());
    match run_microlp(problem, false) {
        Ok(run) => FlowSolution::from_values(problem, run.values, Some(run.objective)),
        Err(microlp::Error::Infeasible) => {
            let mut s = FlowSolution::failed(Status::Infeasible, "no flow meets every demand");
            s.unmet = diagnose(problem);
            s
        }
        Err(microlp::Error::Unbounded) => FlowSolution::failed(Status::Unbounded, "objective unbounded"),
        Err(e) => FlowSolution::failed(Status::SolverError, e.to_string()),
    }
}

/// Runs an external solver through files: the problem is written as LP
/// text to `{input}`, the solver writes its solution to `{output}`. A zero
/// exit status means the output file is present; anything else is a solver
/// error.
fn external(problem: &FlowProblem, template: &str) -> FlowSolution {
    let dir = match tempfile::tempdir() {
        Ok(d) => d,
        Err(e) => return FlowSolution::failed(Status::SolverError, format!("temp dir: {e}")),
    };
    let input = dir.path().join("problem.lp");
    let output = dir.path().join("solution.txt");
    if let Err(e) = std::fs::write(&input, emit_interchange(problem)) {
        return FlowSolution::failed(Status::SolverError, format!("{}: {e}", input.display()));
    }
    let cmd = template
        .replace("{input}", &input.to_string_lossy())
        .replace("{output}", &output.to_string_lossy());
    debug!("external solver: {cmd}");
    let result = match Command::new("sh").arg("-c").arg(&cmd).output() {
        Ok(r) => r,
        Err(e) => return FlowSolution::failed(Status::SolverError, format!("cannot start `{cmd}`: {e}")),
    };
    if !result.status.success() {
        let stderr = String::from_utf8_lossy(&result.stderr);
        return FlowSolution::failed(
            Status::SolverError,
            format!("`{cmd}` exited with {}: {}", result.status, stderr.trim()),
        );
    }
    let text = match std::fs::read_to_string(&output) {
        Ok(t) => t,
        Err(e) => return FlowSolution::failed(Status::SolverError, format!("{}: {e}", output.display())),
    };
    let parsed = parse_solution_text(&text, &problem.names);
    match parsed.status {
        Status::Optimal => {
            let values = problem
                .names
                .iter()
                .map(|n| parsed.values.get(n).copied().unwrap_or(0.0))
                .collect();
            FlowSolution::from_values(problem, values, parsed.objective.map(|o| o / COST_SCALE))
        }
        Status::Infeasible => {
            let mut s = FlowSolution::failed(Status::Infeasible, "external solver reports infeasible");
            if problem.vars.len() <= DIAGNOSE_MAX_VARS {
                s.unmet = diagnose(problem);
            }
            s
        }
        status => FlowSolution::failed(status, format!("external solver status {status}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::network::NodeId;

    #[test]
    fn single_path_example() {
        let p = fixtures::single_path(10.0, 50.0, 10.0, 5.0).formulate().unwrap();
        let s = solve(&p, &Backend::Embedded);
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective - 300e6).abs() <= 1e-6 * 300e6);
        let flow = p.vars.iter().position(|k| k.arc().is_some()).unwrap();
        assert!((s.values[flow] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn merit_order_example() {
        let p = fixtures::two_mines(3.0, 10.0, 50.0, 60.0, 5.0).formulate().unwrap();
        let s = solve(&p, &Backend::Embedded);
        assert_eq!(s.status, Status::Optimal);
        let supply = |node: &str| {
            p.vars
                .iter()
                .position(|k| matches!(k, crate::optimizer::VarKey::Supply { node: n, .. } if n.as_str() == node))
                .map(|i| s.values[i])
                .unwrap()
        };
        assert!((supply("m1") - 3.0).abs() < 1e-9);
        assert!((supply("m2") - 2.0).abs() < 1e-9);
    }

    #[test]
    fn excess_demand_is_infeasible_with_diagnosis() {
        let p = fixtures::single_path(10.0, 50.0, 10.0, 12.0).formulate().unwrap();
        let s = solve(&p, &Backend::Embedded);
        assert_eq!(s.status, Status::Infeasible);
        assert_eq!(s.unmet.len(), 1);
        assert_eq!(s.unmet[0].node, NodeId::from("city"));
        assert!((s.unmet[0].shortfall - fixtures::pj_of(2.0)).abs() < 1e-6);
    }

    #[test]
    fn empty_demand_costs_nothing() {
        let mut f = fixtures::single_path(10.0, 50.0, 10.0, 0.0);
        f.demand.other.clear();
        let s = solve(&f.formulate().unwrap(), &Backend::Embedded);
        assert_eq!(s.status, Status::Optimal);
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn backend_parsing() {
        assert_eq!("embedded".parse::<Backend>().unwrap(), Backend::Embedded);
        let b: Backend = "external:highs {input} -o {output}".parse().unwrap();
        assert_eq!(b, Backend::External("highs {input} -o {output}".into()));
        assert_eq!(b.to_string(), "external:highs {input} -o {output}");
        assert!("external:highs".parse::<Backend>().is_err());
        assert!("cplex".parse::<Backend>().is_err());
    }

    #[test]
    fn external_process_contract() {
        let p = fixtures::single_path(10.0, 50.0, 10.0, 5.0).formulate().unwrap();
        let names = &p.names;
        let script = format!(
            "test -s {{input}} && printf 'Model status\\nOptimal\\nObjective 300\\n{} 5\\n{} 5\\n' > {{output}}",
            names[0], names[1]
        );
        let s = solve(&p, &Backend::External(script));
        assert_eq!(s.status, Status::Optimal, "{:?}", s.message);
        assert!((s.objective - 300e6).abs() < 1e-3);
        let failing = solve(&p, &Backend::External("exit 3 # {input} {output}".into()));
        assert_eq!(failing.status, Status::SolverError);
    }
}
