//! Solves a random ordered instance and prints the best tour with its
//! stage costs.

use pcotsp::instance::gen_euclidean;
use pcotsp::pcotsp::{solve, Params};

fn main() -> pcotsp::Result<()> {
    let inst = gen_euclidean(9, 3, 7, 1.0)?;
    let rep = solve(&inst, &Params::default().with_seed(1).with_trials(32))?;
    let best = &rep.best;
    println!("lp value  {:.4}", rep.lp_value);
    println!("best      {:.4} ({})", best.objective, best.algorithm);
    println!("tour      {:?}", best.solution.route.vertices());
    println!(
        "skipped   {:?} (penalty {:.4})",
        (0..inst.n)
            .filter(|v| !best.solution.covered.contains(v))
            .collect::<Vec<_>>(),
        best.solution.penalty_paid
    );
    println!("pcotsp mean {:.4}, simple mean {:.4}", rep.pcotsp.mean, rep.simple.mean);
    let sc = &best.stage_costs;
    println!(
        "stages: cycle {:.4}, trees {:.4}, join {:?}, multigraph {:?}",
        sc.cycle, sc.trees, sc.join, sc.multigraph
    );
    Ok(())
}
