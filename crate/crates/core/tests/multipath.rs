use pcotsp::instance::gen_euclidean_pairs;
use pcotsp::instance::Penalty;
use pcotsp::multipath::{prepare_multipath, run_algorithm_a, run_algorithm_b, MultipathParams};
use proptest::prelude::*;

#[test]
fn zero_penalties_cost_only_paths() {
    let mut inst = gen_euclidean_pairs(7, 2, 4, 1.0).unwrap();
    inst.penalty = vec![Penalty::Finite(0.0); 7];
    let prep = prepare_multipath(&inst, &MultipathParams::default()).unwrap();
    for t in 0..5 {
        let r = run_algorithm_a(&prep, t).unwrap();
        assert_eq!(r.objective, r.solution.tour_cost);
    }
}

#[test]
fn sigma_is_drawn_above_lower_end() {
    let inst = gen_euclidean_pairs(8, 2, 6, 2.0).unwrap();
    let params = MultipathParams::default();
    let prep = prepare_multipath(&inst, &params).unwrap();
    for t in 0..50 {
        let s = run_algorithm_a(&prep, t).unwrap().thresholds.sigma.unwrap();
        assert!(s >= params.sigma0_prime && s <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn paths_are_disjoint_and_valid(seed in 0u64..10_000, n in 4usize..9, k in 1usize..3, scale in 0.1f64..3.0) {
        prop_assume!(2 * k <= n);
        let inst = gen_euclidean_pairs(n, k, seed, scale).unwrap();
        let prep = prepare_multipath(&inst, &MultipathParams { seed, ..Default::default() }).unwrap();
        for t in 0..4 {
            for r in [run_algorithm_a(&prep, t).unwrap(), run_algorithm_b(&prep, t).unwrap()] {
                prop_assert!(r.solution.check(&inst).is_empty());
                prop_assert!(r.solution.tour_cost <= r.stage_costs.multigraph.unwrap() + 1e-9);
            }
        }
    }
}
