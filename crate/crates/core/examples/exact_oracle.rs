//! Exact optima of small instances next to their LP bounds.

use pcotsp::instance::gen_euclidean;
use pcotsp::lp::{solve_lp, LpMode, LpVariant};
use pcotsp::oracle::exact_pcotsp;

fn main() -> pcotsp::Result<()> {
    for seed in 0..5 {
        let inst = gen_euclidean(9, 3, seed, 1.0)?;
        let lp = solve_lp(&inst, LpVariant::Ordered, LpMode::CuttingPlane)?.objective;
        let opt = exact_pcotsp(&inst)?;
        println!(
            "seed {seed}: lp {lp:.4}, optimum {:.4}, tour {:?}",
            opt.objective,
            opt.solution.route.vertices()
        );
    }
    match exact_pcotsp(&gen_euclidean(11, 3, 0, 1.0)?) {
        Err(e) => println!("n = 11: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
