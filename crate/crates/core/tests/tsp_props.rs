mod common;

use common::oracles::{labeled_brute_force, unlabeled_brute_force};
use proptest::prelude::*;
use toro_core::instance::{default_workspace, generate_no_overlap, replay, Instance};
use toro_core::tsp::{
    build_g_no, build_g_uno, contract_labeled, held_karp, retrieve_actions, solve_tour, TourVertex, TspMode,
};

fn no_overlap(max_n: usize) -> impl Strategy<Value = Instance> {
    (0..=max_n, any::<u64>()).prop_map(|(n, seed)| generate_no_overlap(n, seed, default_workspace(n), 0.1).unwrap())
}

fn loaded(inst: &Instance) -> f64 {
    inst.objects.iter().map(|o| o.start.dist(o.goal)).sum()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn labeled_exact_matches_permutations(inst in no_overlap(6)) {
        let best = labeled_brute_force(&inst);
        let g = build_g_no(&inst).unwrap();
        prop_assert_eq!(g.len(), 3 * inst.len() + 3);
        let tour = solve_tour(&g, TspMode::Exact).unwrap();
        let plan = retrieve_actions(&g, &tour, &inst).unwrap();
        prop_assert!(close(plan.distance(), best));
        replay(&inst, &plan).unwrap();
        if !inst.is_empty() {
            prop_assert!(close(tour.length + loaded(&inst), best));
            prop_assert!(close(held_karp(&contract_labeled(&inst)).1, best));
        }
    }

    #[test]
    fn labeled_heuristic_is_valid_and_no_better(inst in no_overlap(7)) {
        let g = build_g_no(&inst).unwrap();
        let exact = solve_tour(&g, TspMode::Exact).unwrap();
        let heur = solve_tour(&g, TspMode::Heuristic).unwrap();
        prop_assert!(heur.length >= exact.length - 1e-9);
        let plan = retrieve_actions(&g, &heur, &inst).unwrap();
        replay(&inst, &plan).unwrap();
        prop_assert_eq!(plan.len(), inst.len());
    }

    #[test]
    fn unlabeled_exact_matches_brute_force(inst in no_overlap(5)) {
        let mut inst = inst;
        inst.labeled = false;
        let g = build_g_uno(&inst).unwrap();
        prop_assert_eq!(g.len(), 2 * inst.len() + 3);
        let exact = solve_tour(&g, TspMode::Exact).unwrap();
        let plan = retrieve_actions(&g, &exact, &inst).unwrap();
        replay(&inst, &plan).unwrap();
        prop_assert!(close(plan.distance(), unlabeled_brute_force(&inst)));
        if !inst.is_empty() {
            prop_assert!(close(exact.length, plan.distance()));
        }
        let heur = solve_tour(&g, TspMode::Heuristic).unwrap();
        prop_assert!(heur.length >= exact.length - 1e-9);
        replay(&inst, &retrieve_actions(&g, &heur, &inst).unwrap()).unwrap();
    }

    #[test]
    fn tour_uses_only_finite_edges(inst in no_overlap(8)) {
        let g = build_g_no(&inst).unwrap();
        let t = solve_tour(&g, TspMode::Heuristic).unwrap();
        let k = t.vertices.len();
        prop_assert_eq!(k, g.len());
        for w in 0..k {
            prop_assert!(!g.is_forbidden(t.vertices[w], t.vertices[(w + 1) % k]));
        }
        prop_assert_eq!(g.vertices[t.vertices[k - 1]], TourVertex::Hub);
    }
}

#[test]
fn exact_size_limits() {
    let inst = generate_no_overlap(16, 1, default_workspace(16), 0.1).unwrap();
    assert!(solve_tour(&build_g_no(&inst).unwrap(), TspMode::Exact).is_err());
    let mut u = generate_no_overlap(11, 1, default_workspace(11), 0.1).unwrap();
    u.labeled = false;
    assert!(solve_tour(&build_g_uno(&u).unwrap(), TspMode::Exact).is_err());
}

#[test]
fn unlabeled_ten_objects_beats_heuristic_or_ties() {
    for seed in 0..3 {
        let mut u = generate_no_overlap(10, seed, default_workspace(10), 0.1).unwrap();
        u.labeled = false;
        let g = build_g_uno(&u).unwrap();
        let e = solve_tour(&g, TspMode::Exact).unwrap();
        let h = solve_tour(&g, TspMode::Heuristic).unwrap();
        assert!(e.length <= h.length + 1e-9);
        replay(&u, &retrieve_actions(&g, &e, &u).unwrap()).unwrap();
    }
}

#[test]
fn two_hundred_objects_heuristic() {
    let inst = generate_no_overlap(200, 7, default_workspace(200), 0.1).unwrap();
    let g = build_g_no(&inst).unwrap();
    let t = solve_tour(&g, TspMode::Heuristic).unwrap();
    let plan = retrieve_actions(&g, &t, &inst).unwrap();
    assert_eq!(plan.len(), 200);
    assert!(close(plan.distance(), t.length + loaded(&inst)));
}
