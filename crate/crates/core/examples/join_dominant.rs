//! Checks that the z vector of a round pays for its parity join.

use pcotsp::graph::SymMatrix;
use pcotsp::instance::{closure_of, MetricInstance, Penalty, Terminals};
use pcotsp::lp::{solve_lp, LpMode, LpVariant};
use pcotsp::oracle::verify_join_dominant;
use pcotsp::pcotsp::{prepare_from, run_pcotsp_traced, Params};
use rand::{Rng, SeedableRng};

fn main() -> pcotsp::Result<()> {
    let n = 9;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let cost = closure_of(&SymMatrix::from_fn(n, |u, v| {
        if u == v {
            0.0
        } else {
            rng.gen_range(1.0..2.0)
        }
    }));
    let with_skips = |skip: &[usize]| {
        let penalty = (0..n)
            .map(|v| Penalty::Finite(if skip.contains(&v) { 0.0 } else { 10.0 }))
            .collect();
        MetricInstance::new(cost.clone(), penalty, Terminals::Ordered(vec![0, 1, 2]))
    };
    // a fractional point: mostly the full tour, partly tours that skip vertices
    let inst = with_skips(&[]);
    let mut point = solve_lp(&inst, LpVariant::Ordered, LpMode::CuttingPlane)?;
    for (skip, w) in [(vec![3, 5, 7], 0.8), (vec![4, 6, 8], 0.85), (vec![3, 4], 0.9)] {
        point = point.mix(
            &solve_lp(&with_skips(&skip), LpVariant::Ordered, LpMode::CuttingPlane)?,
            w,
        )?;
    }
    let prep = prepare_from(&inst, &Params::default(), point)?;
    println!(
        "y = {:?}",
        prep.lp
            .y_total
            .iter()
            .map(|y| (y * 1000.0).round() / 1000.0)
            .collect::<Vec<_>>()
    );

    let mut shown = 0;
    for trial in 0..500 {
        let (rep, st) = run_pcotsp_traced(&prep, trial, 0)?;
        let odd = st.pruned_graph.odd_vertices();
        if odd.is_empty() {
            continue;
        }
        let cut = verify_join_dominant(&st.z, &odd)?;
        println!(
            "trial {trial}: gamma {:.3}, sigma {:.3}, odd {odd:?}, min odd cut {:.4}, c(J) {:.4} <= c(z) {:.4}",
            st.gamma,
            st.sigma,
            cut.min_cut,
            st.join.cost,
            rep.stage_costs.z.unwrap()
        );
        shown += 1;
        if shown == 5 {
            break;
        }
    }
    if shown == 0 {
        println!("no round needed a join");
    }
    Ok(())
}
