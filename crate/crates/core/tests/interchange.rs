use coalnet::fixtures;
use coalnet::optimizer::{emit_interchange, FlowProblem, ProblemContext};
use lp_parser_rs::problem::LpProblem;
use std::path::PathBuf;

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/canonical.lp")
}

#[test]
fn canonical_matches_golden() {
    let text = emit_interchange(&fixtures::canonical().formulate().unwrap());
    let path = golden_path();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &text).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden file; run with UPDATE_GOLDEN=1 to create");
    assert_eq!(text, golden);
}

#[test]
fn canonical_parses_externally() {
    let p = fixtures::canonical().formulate().unwrap();
    let text = emit_interchange(&p);
    let parsed = LpProblem::parse(&text).expect("LP text parses");
    assert_eq!(parsed.constraint_count(), p.rows.len());
    assert_eq!(parsed.variable_count(), p.vars.len());
    assert_eq!(parsed.objective_count(), 1);
}

#[test]
fn empty_problem_parses_externally() {
    let p = FlowProblem {
        year: 2020,
        vars: vec![],
        costs: vec![],
        names: vec![],
        rows: vec![],
        context: ProblemContext::default(),
    };
    let text = emit_interchange(&p);
    let parsed = LpProblem::parse(&text).expect("empty LP text parses");
    assert_eq!(parsed.constraint_count(), 0);
}

fn highspy_available() -> bool {
    std::process::Command::new("python3")
        .args(["-c", "import highspy"])
        .output()
        .is_ok_and(|o| o.status.success())
}

#[test]
fn highs_agrees_with_embedded_when_installed() {
    use coalnet::optimizer::{check_solution, solve, Backend, Status};
    if !highspy_available() {
        eprintln!("skipped: python3 highspy not importable");
        return;
    }
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scripts/highs_solve.py");
    let backend = Backend::External(format!("python3 {} {{input}} {{output}}", script.display()));
    let p = fixtures::canonical().formulate().unwrap();
    let external = solve(&p, &backend);
    let embedded = solve(&p, &Backend::Embedded);
    assert_eq!(external.status, Status::Optimal, "{:?}", external.message);
    assert!((external.objective - embedded.objective).abs() <= 1e-6 * embedded.objective);
    let report = check_solution(&p, &external);
    assert!(report.is_clean(), "{:?}", report.incidents);

    let infeasible = fixtures::single_path(10.0, 50.0, 10.0, 12.0).formulate().unwrap();
    assert_eq!(solve(&infeasible, &backend).status, Status::Infeasible);
}
