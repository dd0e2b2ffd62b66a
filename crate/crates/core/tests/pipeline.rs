use pcotsp::graph::SymMatrix;
use pcotsp::instance::{gen_euclidean, MetricInstance, Penalty, Terminals};
use pcotsp::lp::check_invariants;
use pcotsp::pcotsp::{
    prepare, prepare_from, prepare_simple, run_pcotsp_traced, run_simple, shortcut_ordered, solve, Params,
    PipelineState, Prepared,
};
use pcotsp::report::SolutionReport;
use proptest::prelude::*;

mod common;

fn equilateral(k: usize) -> MetricInstance {
    let cost = SymMatrix::from_fn(k, |u, v| if u == v { 0.0 } else { 1.0 });
    MetricInstance::new(
        cost,
        vec![Penalty::Finite(0.0); k],
        Terminals::Ordered((0..k).collect()),
    )
}

#[test]
fn triangle_of_terminals() {
    let inst = equilateral(3);
    let rep = solve(&inst, &Params::default().with_trials(3)).unwrap();
    assert!((rep.best.objective - 3.0).abs() < 1e-9);
    assert_eq!(rep.best.solution.route.vertices(), vec![0, 1, 2]);
}

#[test]
fn zero_penalties_cost_nothing_when_skipped() {
    let mut inst = gen_euclidean(7, 3, 8, 1.0).unwrap();
    inst.penalty = vec![Penalty::Finite(0.0); 7];
    let rep = solve(&inst, &Params::default().with_trials(4)).unwrap();
    assert_eq!(rep.best.solution.penalty_paid, 0.0);
    assert!((rep.best.objective - rep.best.solution.tour_cost).abs() < 1e-12);
}

#[test]
fn infinite_penalties_force_full_tours() {
    let mut inst = gen_euclidean(7, 2, 5, 1.0).unwrap();
    inst.penalty = vec![Penalty::Infinite; 7];
    let rep = solve(&inst, &Params::default().with_trials(4)).unwrap();
    assert_eq!(rep.best.solution.covered.len(), 7);
    assert!(rep.split_off.is_empty());
}

#[test]
fn shortcut_doubled_pendant_at_terminal() {
    let cost = SymMatrix::from_fn(4, |u, v| if u == v { 0.0 } else { 1.0 });
    let mut h = pcotsp::graph::MultiGraph::new(4);
    for (u, v) in [(0, 1), (1, 2), (2, 0), (0, 3), (0, 3)] {
        h.add_edge_costed(u, v, &cost);
    }
    let tour = shortcut_ordered(&h, &[0, 1, 2], &[true, true, true, false]).unwrap();
    assert_eq!(tour, vec![0, 3, 1, 2]);
    let c: f64 = (0..4).map(|i| cost.get(tour[i], tour[(i + 1) % 4])).sum();
    assert!(c <= h.cost());
}

#[test]
fn fixed_seed_is_reproducible() {
    let inst = gen_euclidean(8, 3, 1, 1.0).unwrap();
    let p = Params::default().with_seed(42).with_trials(1);
    let a = solve(&inst, &p).unwrap();
    let b = solve(&inst, &p).unwrap();
    assert_eq!(a.best.solution, b.best.solution);
    assert_eq!(a.best.thresholds, b.best.thresholds);
}

/// Structural checks on one round of the main pipeline.
fn check_round(prep: &Prepared, rep: &SolutionReport, st: &PipelineState) -> Result<(), TestCaseError> {
    let inst = &prep.inst;
    let n = inst.n;
    let c = prep.params.constants;
    let y = &prep.lp.y_total;
    prop_assert!(rep.solution.check(inst).is_empty());
    prop_assert!((rep.objective - rep.solution.tour_cost - rep.solution.penalty_paid).abs() < 1e-9);
    prop_assert!(st.gamma >= c.theta && st.gamma <= c.sigma0);
    prop_assert!(st.sigma >= c.sigma0 && st.sigma <= 1.0);
    prop_assert_eq!(rep.join_within_z, Some(true));
    prop_assert!(rep.solution.tour_cost <= rep.stage_costs.multigraph.unwrap() + 1e-9);

    // the backbone walk is closed and passes every terminal once
    let Terminals::Ordered(order) = &inst.terminals else {
        unreachable!()
    };
    let on_walk: Vec<usize> = st.cycle.iter().copied().filter(|v| order.contains(v)).collect();
    prop_assert_eq!(&on_walk, order);

    // layers partition the hanging edges, as a multiset
    let mut layered: Vec<(usize, usize, usize)> = st
        .layers
        .edges
        .iter()
        .flatten()
        .map(|e| (e.tree, e.u.min(e.v), e.u.max(e.v)))
        .collect();
    let mut hanging: Vec<(usize, usize, usize)> = st
        .trees
        .iter()
        .enumerate()
        .flat_map(|(j, t)| t.hanging_edges().into_iter().map(move |(u, v)| (j, u.min(v), u.max(v))))
        .collect();
    layered.sort_unstable();
    hanging.sort_unstable();
    prop_assert_eq!(layered, hanging);
    prop_assert_eq!(st.layers.eta[0], c.sigma0);

    // every path survives pruning; pruning drops only vertices in [theta, gamma)
    for (t, pruned) in st.trees.iter().zip(&st.pruned) {
        for w in t.path.windows(2) {
            prop_assert!(pruned
                .iter()
                .any(|&(a, b)| (a, b) == (w[0], w[1]) || (b, a) == (w[0], w[1])));
        }
        let before = pcotsp::decomp::tree_vertices(&t.edges, t.s, t.t, n);
        let after = pcotsp::decomp::tree_vertices(pruned, t.s, t.t, n);
        for v in before.iter().filter(|v| !after.contains(v)) {
            prop_assert!(y[*v] >= c.theta - 1e-9 && y[*v] < st.gamma);
        }
    }
    // every vertex with y >= sigma ends up in the pruned graph or a tree
    let in_graph = st.pruned_graph.support_vertices();
    for v in (0..n).filter(|&v| y[v] >= st.sigma && !order.contains(&v)) {
        prop_assert!(in_graph.contains(&v), "vertex {} with y {} missing", v, y[v]);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn round_invariants(seed in 0u64..10_000, n in 4usize..9, k in 2usize..4, scale in 0.1f64..3.0) {
        prop_assume!(k <= n);
        let inst = gen_euclidean(n, k, seed, scale).unwrap();
        let params = Params::default().with_seed(seed);
        let prep = prepare(&inst, &params).unwrap();
        for trial in 0..4 {
            let (rep, st) = run_pcotsp_traced(&prep, trial, 0).unwrap();
            check_round(&prep, &rep, &st)?;
        }
    }

    #[test]
    fn mixed_point_rounds(seed in 0u64..10_000, n in 5usize..9, k in 2usize..4, euclidean: bool) {
        let (inst, point) = common::mixed_point(seed, n, k, euclidean, 3).unwrap();
        prop_assert!(check_invariants(&point).is_empty());
        let prep = prepare_from(&inst, &Params::default().with_seed(seed), point).unwrap();
        for trial in 0..4 {
            let (rep, st) = run_pcotsp_traced(&prep, trial, 0).unwrap();
            check_round(&prep, &rep, &st)?;
        }
    }

    #[test]
    fn simple_rounds_are_feasible(seed in 0u64..10_000, n in 3usize..9, k in 2usize..4) {
        prop_assume!(k <= n);
        let inst = gen_euclidean(n, k, seed, 1.0).unwrap();
        let sp = prepare_simple(&inst, &Params::default().with_seed(seed)).unwrap();
        for trial in 0..3 {
            let r = run_simple(&sp, trial).unwrap();
            prop_assert!(r.solution.check(&inst).is_empty());
            prop_assert!(r.solution.tour_cost <= r.stage_costs.multigraph.unwrap() + 1e-9);
        }
    }
}
