//! Fractional points of the ordered relaxation.
//!
//! Optimal points of small instances are nearly always integral, which
//! leaves the threshold stages idle. Mixing optima of the same metric under
//! different penalties gives feasible points with `y` spread over `(0, 1)`.

#![allow(dead_code)]

use pcotsp::graph::SymMatrix;
use pcotsp::instance::{closure_of, gen_euclidean, MetricInstance, Penalty, Terminals};
use pcotsp::lp::{solve_lp, LpMode, LpVariant, StrollLpSolution};
use pcotsp::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform random edge lengths in `[1, 2)`, closed to a metric.
pub fn random_metric(n: usize, rng: &mut impl Rng) -> SymMatrix {
    closure_of(&SymMatrix::from_fn(n, |u, v| {
        if u == v {
            0.0
        } else {
            rng.gen_range(1.0..2.0)
        }
    }))
}

/// An instance (every penalty 10) and a feasible fractional point of its
/// relaxation, mixed from `mixes + 1` optima that skip random vertex sets.
pub fn mixed_point(
    seed: u64,
    n: usize,
    k: usize,
    euclidean: bool,
    mixes: usize,
) -> Result<(MetricInstance, StrollLpSolution)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cost = if euclidean {
        gen_euclidean(n, k, seed, 1.0)?.cost
    } else {
        random_metric(n, &mut rng)
    };
    let with = |skip: &[bool]| {
        let penalty = (0..n)
            .map(|v| Penalty::Finite(if skip[v] { 0.0 } else { 10.0 }))
            .collect();
        MetricInstance::new(cost.clone(), penalty, Terminals::Ordered((0..k).collect()))
    };
    let inst = with(&vec![false; n]);
    let mut point = solve_lp(&inst, LpVariant::Ordered, LpMode::CuttingPlane)?;
    for _ in 0..mixes {
        let skip: Vec<bool> = (0..n).map(|v| v >= k && rng.gen_bool(0.5)).collect();
        let other = solve_lp(&with(&skip), LpVariant::Ordered, LpMode::CuttingPlane)?;
        point = point.mix(&other, rng.gen_range(0.6..0.95))?;
    }
    Ok((inst, point))
}
