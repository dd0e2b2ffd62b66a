//! Runs both multi-path algorithms on a pairs instance.

use pcotsp::instance::{gen_euclidean_pairs, Route};
use pcotsp::multipath::{solve_multipath, MultipathParams};
use pcotsp::oracle::exact_multipath;

fn main() -> pcotsp::Result<()> {
    let inst = gen_euclidean_pairs(8, 2, 5, 1.0)?;
    let params = MultipathParams {
        trials: 64,
        ..Default::default()
    };
    let rep = solve_multipath(&inst, &params)?;
    println!(
        "lp {:.4}, optimum {:.4}",
        rep.lp_value,
        exact_multipath(&inst)?.objective
    );
    println!(
        "A mean {:.4}, B mean {:.4}, coin flip {:.4}",
        rep.algorithm_a.mean, rep.algorithm_b.mean, rep.coin_flip_mean
    );
    println!("eta {:.4}, guarantee {:.4}", rep.eta, rep.bound);
    if let Route::PathCollection { paths } = &rep.best.solution.route {
        for p in paths {
            println!("path {p:?}");
        }
    }
    Ok(())
}
