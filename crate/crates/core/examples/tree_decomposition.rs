//! Decomposes a fractional point into a distribution over trees and samples
//! from it.

use pcotsp::decomp::{decompose, DecompCaps};
use pcotsp::instance::{gen_euclidean, Penalty};
use pcotsp::lp::{solve_lp, LpMode, LpVariant};
use rand::SeedableRng;

fn main() -> pcotsp::Result<()> {
    // optima of small instances are integral; mixing two of them is not
    let mut inst = gen_euclidean(7, 2, 3, 1.0)?;
    inst.penalty = vec![Penalty::Finite(10.0); 7];
    let all = solve_lp(&inst, LpVariant::Ordered, LpMode::CuttingPlane)?;
    let mut lazy = inst.clone();
    for v in 4..7 {
        lazy.penalty[v] = Penalty::Finite(0.0);
    }
    let some = solve_lp(&lazy, LpVariant::Ordered, LpMode::CuttingPlane)?;
    let point = all.mix(&some, 0.7)?;

    for (i, &(s, t)) in point.components.iter().enumerate() {
        let d = decompose(&point.x[i], &point.y[i], s, t, &inst.cost, DecompCaps::default())?;
        println!(
            "component {s}-{t}: {} trees out of {} candidates",
            d.trees.len(),
            d.candidates
        );
        for (tree, mu) in d.trees.iter().zip(&d.mu) {
            println!("  mu {mu:.4}  {tree:?}");
        }
        let problems = d.check(&point.x[i], &point.y[i]);
        println!("  properties: {}", if problems.is_empty() { "ok" } else { "violated" });
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        println!("  sampled {:?}", d.sample_tree(&mut rng));
    }
    Ok(())
}
