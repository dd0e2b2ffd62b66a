use super::MultiGraph;
use crate::error::{Error, Result};

/// Closed walk from `start` using every edge exactly once (Hierholzer).
///
/// Returns the vertex sequence, whose first and last entries are `start`.
/// A graph without edges yields `[start]`.
pub fn euler_circuit(g: &MultiGraph, start: usize) -> Result<Vec<usize>> {
    if let Some(v) = g.degrees().iter().position(|d| d % 2 == 1) {
        return Err(Error::InvalidArgument(format!(
            "vertex {v} has odd degree; no Euler circuit"
        )));
    }
    walk(g, start)
}

/// Walk from `s` to `t` using every edge exactly once. Requires `s` and `t`
/// to be the only odd-degree vertices (or all degrees even when `s == t`).
pub fn euler_trail(g: &MultiGraph, s: usize, t: usize) -> Result<Vec<usize>> {
    let deg = g.degrees();
    for (v, d) in deg.iter().enumerate() {
        let should_be_odd = s != t && (v == s || v == t);
        if (d % 2 == 1) != should_be_odd {
            return Err(Error::InvalidArgument(format!(
                "vertex {v} has degree {d}; no Euler trail from {s} to {t}"
            )));
        }
    }
    let seq = walk(g, s)?;
    debug_assert_eq!(*seq.last().unwrap(), t);
    Ok(seq)
}

fn walk(g: &MultiGraph, start: usize) -> Result<Vec<usize>> {
    if start >= g.n {
        return Err(Error::InvalidArgument(format!("start vertex {start} out of range")));
    }
    if g.edges.is_empty() {
        return Ok(vec![start]);
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); g.n];
    for (id, e) in g.edges.iter().enumerate() {
        adj[e.u].push((e.v, id));
        adj[e.v].push((e.u, id));
    }
    // Reverse so that popping yields edges in insertion order.
    for list in &mut adj {
        list.reverse();
    }
    let mut used = vec![false; g.edges.len()];
    let mut stack = vec![start];
    let mut out = Vec::with_capacity(g.edges.len() + 1);
    while let Some(&v) = stack.last() {
        let mut advanced = false;
        while let Some((w, id)) = adj[v].pop() {
            if !used[id] {
                used[id] = true;
                stack.push(w);
                advanced = true;
                break;
            }
        }
        if !advanced {
            out.push(v);
            stack.pop();
        }
    }
    if used.iter().any(|u| !u) {
        return Err(Error::InvalidArgument(
            "edge support is disconnected from the start vertex".into(),
        ));
    }
    out.reverse();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn check_walk(g: &MultiGraph, seq: &[usize]) {
        let mut remaining: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &g.edges {
            *remaining.entry(e.key()).or_default() += 1;
        }
        for w in seq.windows(2) {
            let key = (w[0].min(w[1]), w[0].max(w[1]));
            let slot = remaining.get_mut(&key).expect("walk uses a non-edge");
            assert!(*slot > 0, "edge {key:?} used too often");
            *slot -= 1;
        }
        assert!(remaining.values().all(|&c| c == 0));
        assert_eq!(seq.len(), g.edges.len() + 1);
    }

    #[test]
    fn doubled_edge() {
        let mut g = MultiGraph::new(2);
        g.add_edge(0, 1, 1.0);
        g.add_edge(0, 1, 1.0);
        assert_eq!(euler_circuit(&g, 0).unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn triangle() {
        let mut g = MultiGraph::new(3);
        g.add_edge(0, 1, 1.0);
        g.add_edge(1, 2, 1.0);
        g.add_edge(2, 0, 1.0);
        let seq = euler_circuit(&g, 1).unwrap();
        assert_eq!(seq.len(), 4);
        assert_eq!(seq[0], 1);
        assert_eq!(seq[3], 1);
        check_walk(&g, &seq);
    }

    #[test]
    fn odd_degree_and_disconnected_rejected() {
        let mut g = MultiGraph::new(4);
        g.add_edge(0, 1, 1.0);
        assert!(euler_circuit(&g, 0).is_err());
        g.add_edge(0, 1, 1.0);
        g.add_edge(2, 3, 1.0);
        g.add_edge(2, 3, 1.0);
        assert!(euler_circuit(&g, 0).is_err());
    }

    #[test]
    fn trail_between_odd_endpoints() {
        let mut g = MultiGraph::new(4);
        g.add_edge(0, 1, 1.0);
        g.add_edge(1, 2, 1.0);
        g.add_edge(2, 1, 1.0);
        g.add_edge(1, 3, 1.0);
        let seq = euler_trail(&g, 0, 3).unwrap();
        assert_eq!(seq[0], 0);
        assert_eq!(*seq.last().unwrap(), 3);
        check_walk(&g, &seq);
    }

    #[test]
    fn random_even_multigraphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.gen_range(2..=8);
            // union of random closed walks through vertex 0 is connected and even
            let mut g = MultiGraph::new(n);
            for _ in 0..rng.gen_range(1..4) {
                let len = rng.gen_range(2..6);
                let mut cur = 0;
                for step in 0..len {
                    let next = if step + 1 == len { 0 } else { rng.gen_range(0..n) };
                    if next != cur {
                        g.add_edge(cur, next, 1.0);
                        cur = next;
                    }
                }
                if cur != 0 {
                    g.add_edge(cur, 0, 1.0);
                }
            }
            let seq = euler_circuit(&g, 0).unwrap();
            assert_eq!(seq[0], 0);
            assert_eq!(*seq.last().unwrap(), 0);
            check_walk(&g, &seq);
        }
    }
}
