use serde::Serialize;

use super::{MultiGraph, SymMatrix};
use crate::error::{Error, Result};

/// Default limit on `|T|` for the exact join.
pub const DEFAULT_JOIN_CAP: usize = 22;

/// A minimum T-join, represented as a perfect matching on `T` by direct edges.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TJoin {
    pub pairs: Vec<(usize, usize)>,
    pub cost: f64,
}

impl TJoin {
    pub fn to_multigraph(&self, cost: &SymMatrix) -> MultiGraph {
        let mut g = MultiGraph::new(cost.n());
        for &(u, v) in &self.pairs {
            g.add_edge_costed(u, v, cost);
        }
        g
    }
}

/// Minimum-cost perfect matching on `t` under metric `cost`, which is a
/// minimum T-join of the metric. Exact bitmask DP, `O(2^|T| |T|)`.
///
/// The lowest unmatched element is always paired first and partners are tried
/// in increasing order, keeping the strictly cheaper choice, so results are
/// deterministic.
pub fn min_tjoin(cost: &SymMatrix, t: &[usize], cap: usize) -> Result<TJoin> {
    let m = t.len();
    if m % 2 == 1 {
        return Err(Error::InvalidArgument(format!("T-join set has odd cardinality {m}")));
    }
    if m > cap {
        return Err(Error::SizeCap {
            what: "join",
            actual: m,
            cap,
        });
    }
    if m == 0 {
        return Ok(TJoin {
            pairs: Vec::new(),
            cost: 0.0,
        });
    }
    let full = (1usize << m) - 1;
    // best[mask] = cost of matching the elements of `mask`
    let mut best = vec![f64::INFINITY; 1 << m];
    let mut choice = vec![0u8; 1 << m];
    best[0] = 0.0;
    for mask in 1..=full {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << i);
        let mut bits = rest;
        while bits != 0 {
            let j = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let cand = best[rest & !(1 << j)] + cost.get(t[i], t[j]);
            if cand < best[mask] {
                best[mask] = cand;
                choice[mask] = j as u8;
            }
        }
    }
    let mut pairs = Vec::with_capacity(m / 2);
    let mut mask = full;
    while mask != 0 {
        let i = mask.trailing_zeros() as usize;
        let j = choice[mask] as usize;
        pairs.push((t[i], t[j]));
        mask &= !(1 << i) & !(1 << j);
    }
    Ok(TJoin {
        pairs,
        cost: best[full],
    })
}
