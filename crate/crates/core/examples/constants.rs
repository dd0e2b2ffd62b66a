//! Prints the constants behind both algorithms and checks the threshold
//! scan.

use pcotsp::multipath::{multipath_branches, optimize_sigma0_prime};
use pcotsp::pcotsp::{compute_constants, scan_g, tour_factor, BETA_PC, DEFAULT_ALPHA};

fn main() -> pcotsp::Result<()> {
    let c = compute_constants(DEFAULT_ALPHA)?;
    println!("alpha  = {:.6}", c.alpha);
    println!("theta  = {:.6}", c.theta);
    println!("sigma0 = {:.6}", c.sigma0);
    println!("beta   = {:.6}", c.beta);
    println!("tour factor = {:.6}", tour_factor(c.alpha, BETA_PC)?);

    let scan = scan_g(&c);
    println!(
        "g scan: max {:.6} at {:.6}, nondecreasing: {}",
        scan.max, scan.argmax, scan.nondecreasing
    );

    let s = optimize_sigma0_prime();
    let (a, b) = multipath_branches(s);
    println!("multipath: sigma0' = {s:.6}, branches {a:.6} / {b:.6}");
    Ok(())
}
