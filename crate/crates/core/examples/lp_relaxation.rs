//! Solves the relaxation both ways and shows the fractional coverage.

use pcotsp::instance::gen_euclidean;
use pcotsp::lp::{check_invariants, solve_lp, LpMode, LpVariant};

fn main() -> pcotsp::Result<()> {
    let inst = gen_euclidean(8, 3, 11, 0.8)?;
    let cp = solve_lp(&inst, LpVariant::Ordered, LpMode::CuttingPlane)?;
    let en = solve_lp(&inst, LpVariant::Ordered, LpMode::Enumerated)?;
    println!(
        "cutting plane: {:.6} after {} rounds, {} cuts",
        cp.objective, cp.rounds, cp.cuts
    );
    println!("enumerated:    {:.6} with {} cuts", en.objective, en.cuts);
    println!("connection {:.6}, penalty {:.6}", cp.connection_cost, cp.penalty_cost);
    for (v, y) in cp.y_total.iter().enumerate() {
        println!("  y[{v}] = {y:.4}");
    }
    let errs = check_invariants(&cp);
    println!(
        "invariants: {}",
        if errs.is_empty() {
            "ok".to_string()
        } else {
            errs.join("; ")
        }
    );
    Ok(())
}
