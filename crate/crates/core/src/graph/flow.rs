use std::collections::VecDeque;

use serde::Serialize;

use super::SymMatrix;
use crate::error::{Error, Result};

const RESIDUAL_EPS: f64 = 1e-12;

/// A vertex bipartition `(S, V \ S)` with its capacity `x(delta(S))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cut {
    pub side: Vec<usize>,
    pub capacity: f64,
}

impl Cut {
    pub fn contains(&self, v: usize) -> bool {
        self.side.binary_search(&v).is_ok()
    }
}

/// Minimum cut separating `sources` from `sinks` under undirected capacities.
///
/// Max-flow by shortest augmenting paths with capacity scaling; the returned
/// side is the set reachable from the sources in the final residual graph,
/// and its capacity is recomputed from the capacities themselves.
pub fn min_cut(cap: &SymMatrix, sources: &[usize], sinks: &[usize]) -> Result<Cut> {
    let n = cap.n();
    if sources.is_empty() || sinks.is_empty() {
        return Err(Error::InvalidArgument(
            "min_cut needs at least one source and one sink".into(),
        ));
    }
    if let Some(&bad) = sources.iter().chain(sinks).find(|&&v| v >= n) {
        return Err(Error::InvalidArgument(format!("vertex {bad} out of range")));
    }
    if let Some(&both) = sources.iter().find(|v| sinks.contains(v)) {
        return Err(Error::InvalidArgument(format!(
            "vertex {both} is both a source and a sink"
        )));
    }

    let src = n;
    let snk = n + 1;
    let m = n + 2;
    let big = cap.edges().map(|(_, _, w)| w.max(0.0)).sum::<f64>() + 1.0;
    let mut res = vec![0.0; m * m];
    for (u, v, w) in cap.edges() {
        let w = w.max(0.0);
        res[u * m + v] = w;
        res[v * m + u] = w;
    }
    for &s in sources {
        res[src * m + s] = big;
    }
    for &t in sinks {
        res[t * m + snk] = big;
    }

    let mut delta = 1.0;
    let max_cap = cap.max_entry();
    while delta * 2.0 <= max_cap {
        delta *= 2.0;
    }
    loop {
        let threshold = delta.max(RESIDUAL_EPS);
        while let Some(parent) = bfs(&res, m, src, snk, threshold) {
            let mut bottleneck = f64::INFINITY;
            let mut v = snk;
            while v != src {
                let u = parent[v];
                bottleneck = bottleneck.min(res[u * m + v]);
                v = u;
            }
            let mut v = snk;
            while v != src {
                let u = parent[v];
                res[u * m + v] -= bottleneck;
                res[v * m + u] += bottleneck;
                v = u;
            }
        }
        if delta <= RESIDUAL_EPS {
            break;
        }
        delta /= 2.0;
    }

    let mut reach = vec![false; m];
    reach[src] = true;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for v in 0..m {
            if !reach[v] && res[u * m + v] > RESIDUAL_EPS {
                reach[v] = true;
                queue.push_back(v);
            }
        }
    }
    let in_side: Vec<bool> = (0..n).map(|v| reach[v]).collect();
    let side: Vec<usize> = (0..n).filter(|&v| in_side[v]).collect();
    Ok(Cut {
        capacity: cap.cut_weight(&in_side),
        side,
    })
}

fn bfs(res: &[f64], m: usize, src: usize, snk: usize, threshold: f64) -> Option<Vec<usize>> {
    let mut parent = vec![usize::MAX; m];
    parent[src] = src;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for v in 0..m {
            if parent[v] == usize::MAX && res[u * m + v] >= threshold {
                parent[v] = u;
                if v == snk {
                    return Some(parent);
                }
                queue.push_back(v);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_edge() {
        let mut c = SymMatrix::zeros(2);
        c.set(0, 1, 1.0);
        let cut = min_cut(&c, &[0], &[1]).unwrap();
        assert_eq!(cut.side, vec![0]);
        assert!((cut.capacity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_parallel_half_paths() {
        let mut c = SymMatrix::zeros(4);
        c.set(0, 1, 0.5);
        c.set(1, 3, 0.5);
        c.set(0, 2, 0.5);
        c.set(2, 3, 0.5);
        let cut = min_cut(&c, &[0], &[3]).unwrap();
        assert!((cut.capacity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_terminals_rejected() {
        let c = SymMatrix::zeros(3);
        assert!(min_cut(&c, &[0, 1], &[1]).is_err());
    }

    fn brute_force(c: &SymMatrix, sources: &[usize], sinks: &[usize]) -> f64 {
        let n = c.n();
        let free: Vec<usize> = (0..n).filter(|v| !sources.contains(v) && !sinks.contains(v)).collect();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << free.len()) {
            let mut in_set = vec![false; n];
            for &s in sources {
                in_set[s] = true;
            }
            for (i, &v) in free.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    in_set[v] = true;
                }
            }
            best = best.min(c.cut_weight(&in_set));
        }
        best
    }

    #[test]
    fn matches_exhaustive_minimum_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [5usize, 8, 12] {
            for _ in 0..20 {
                let c = SymMatrix::from_fn(n, |_, _| {
                    if rng.gen_bool(0.6) {
                        rng.gen_range(0.0..1.0)
                    } else {
                        0.0
                    }
                });
                let sources = [0];
                let sinks = if n > 8 { vec![n - 1, n - 2] } else { vec![n - 1] };
                let cut = min_cut(&c, &sources, &sinks).unwrap();
                let expected = brute_force(&c, &sources, &sinks);
                assert!(
                    (cut.capacity - expected).abs() < 1e-9,
                    "{} vs {}",
                    cut.capacity,
                    expected
                );
                assert!(cut.contains(0));
                assert!(sinks.iter().all(|&t| !cut.contains(t)));
            }
        }
    }
}
