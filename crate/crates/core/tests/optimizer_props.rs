use coalnet::fixtures::{self, Fixture};
use coalnet::network::NodeKind;
use coalnet::optimizer::{brute_force_oracle, check_solution, solve, Backend, Family, Status, TOLERANCE};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_fixture(seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || rng.gen::<f64>();
    fixtures::random_small(&mut draw)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn objective_matches_recomputed(seed in 0u64..10_000) {
        let p = random_fixture(seed).formulate().unwrap();
        let s = solve(&p, &Backend::Embedded);
        if s.is_optimal() {
            let r = check_solution(&p, &s);
            prop_assert!(r.objective_gap <= 1e-6, "gap {}", r.objective_gap);
            prop_assert!(r.is_clean(), "{:?}", r.incidents);
        }
    }

    #[test]
    fn cost_scaling(lambda in 0.01f64..100.0, c1 in 20.0f64..80.0, c2 in 20.0f64..80.0) {
        prop_assume!((c1 - c2).abs() > 0.5);
        let p = fixtures::two_mines(3.0, 10.0, c1, c2, 5.0).formulate().unwrap();
        let base = solve(&p, &Backend::Embedded);
        let scaled = solve(&p.scaled_costs(lambda), &Backend::Embedded);
        prop_assert_eq!(base.status, Status::Optimal);
        prop_assert!((scaled.objective - lambda * base.objective).abs() <= 1e-6 * scaled.objective.abs());
        for (a, b) in base.values.iter().zip(&scaled.values) {
            prop_assert!((a - b).abs() <= 1e-7);
        }
    }

    #[test]
    fn oracle_agrees_on_random(seed in 0u64..10_000) {
        let p = random_fixture(seed).formulate().unwrap();
        prop_assume!(p.vars.len() <= 10);
        let o = brute_force_oracle(&p).unwrap();
        let s = solve(&p, &Backend::Embedded);
        prop_assert_eq!(o.status, s.status);
        if s.is_optimal() {
            prop_assert!((o.objective - s.objective).abs() <= 1e-6 * s.objective.abs().max(1.0));
        }
    }
}

#[test]
fn slack_capacity_leaves_objective() {
    let f = fixtures::canonical();
    let p = f.formulate().unwrap();
    let s = solve(&p, &Backend::Embedded);
    assert!(s.is_optimal());
    let (r, _) = p
        .rows
        .iter()
        .enumerate()
        .find(|(i, r)| r.family == Family::LinkCap && s.slacks[*i] > 1.0)
        .expect("a slack link");
    let mut looser = p.clone();
    looser.rows[r].rhs += 50.0;
    let again = solve(&looser, &Backend::Embedded);
    assert!((again.objective - s.objective).abs() <= 1e-6 * s.objective);
}

#[test]
fn tightening_binding_never_helps() {
    let p = fixtures::two_mines(3.0, 10.0, 50.0, 60.0, 5.0).formulate().unwrap();
    let s = solve(&p, &Backend::Embedded);
    let mut tight = p.clone();
    let cap = tight
        .rows
        .iter_mut()
        .find(|r| r.family == Family::SupplyCap && r.rhs == 3.0)
        .unwrap();
    cap.rhs = 2.0;
    let t = solve(&tight, &Backend::Embedded);
    assert!(t.objective >= s.objective - 1e-6);
    assert!((t.objective - (s.objective + 10e6)).abs() < 1e-3);
}

#[test]
fn ports_and_power_demand_hold() {
    let f = fixtures::canonical();
    let p = f.formulate().unwrap();
    let s = solve(&p, &Backend::Embedded);
    let r = check_solution(&p, &s);
    assert!(r.is_clean(), "{:?}", r.incidents);
    for port in f.network.nodes_of_kind(NodeKind::Port) {
        let out: f64 = p
            .vars
            .iter()
            .zip(&s.values)
            .filter(|(k, _)| k.arc().is_some_and(|(a, _, _)| *a == port.id))
            .map(|(_, v)| v)
            .sum();
        assert!(out <= port.port_capa.at(f.year).unwrap() + TOLERANCE);
    }
    for (node, pj) in &f.demand.elec {
        assert!(r.node_energy[node] >= pj - TOLERANCE);
    }
}
