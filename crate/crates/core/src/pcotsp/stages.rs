//! The individual steps of one randomized round: pruning, pickup, the
//! fractional join-dominant vector, parity correction and shortcutting.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{euler_circuit, min_tjoin, mst_rooted_forest, MultiGraph, SymMatrix, TJoin};

/// One sampled tree together with its endpoint path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledTree {
    pub s: usize,
    pub t: usize,
    pub edges: Vec<(usize, usize)>,
    /// Vertex sequence of the `s`-`t` path in the tree.
    pub path: Vec<usize>,
}

impl SampledTree {
    /// Edges of the tree that are not on the endpoint path.
    pub fn hanging_edges(&self) -> Vec<(usize, usize)> {
        let on_path: Vec<(usize, usize)> = self.path.windows(2).map(|w| key(w[0], w[1])).collect();
        self.edges
            .iter()
            .copied()
            .filter(|&(u, v)| !on_path.contains(&key(u, v)))
            .collect()
    }
}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

/// Minimal subtree of `edges` spanning `s`, `t` and every tree vertex with
/// `y_v >= gamma`: leaves below the threshold are stripped until none is left.
pub fn prune_core(edges: &[(usize, usize)], s: usize, t: usize, y: &[f64], gamma: f64) -> Vec<(usize, usize)> {
    let n = y.len();
    let mut deg = vec![0usize; n];
    let mut adj = vec![Vec::new(); n];
    for (i, &(u, v)) in edges.iter().enumerate() {
        deg[u] += 1;
        deg[v] += 1;
        adj[u].push((v, i));
        adj[v].push((u, i));
    }
    let mut alive = vec![true; edges.len()];
    let removable = |v: usize, deg: &[usize]| deg[v] == 1 && v != s && v != t && y[v] < gamma;
    let mut stack: Vec<usize> = (0..n).filter(|&v| removable(v, &deg)).collect();
    while let Some(v) = stack.pop() {
        if !removable(v, &deg) {
            continue;
        }
        let Some(&(w, i)) = adj[v].iter().find(|&&(_, i)| alive[i]) else {
            continue;
        };
        alive[i] = false;
        deg[v] = 0;
        deg[w] -= 1;
        if removable(w, &deg) {
            stack.push(w);
        }
    }
    edges.iter().zip(&alive).filter(|(_, &a)| a).map(|(&e, _)| e).collect()
}

/// A hanging tree edge assigned to a layer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LayerEdge {
    pub tree: usize,
    pub u: usize,
    pub v: usize,
}

/// The hanging edges of all trees grouped by the largest threshold at which
/// they still survive pruning.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Layers {
    /// Thresholds in decreasing order; `eta[0] = sigma0`.
    pub eta: Vec<f64>,
    /// `edges[i]`: hanging edges in the core at `eta[i]` but not at `eta[i-1]`.
    pub edges: Vec<Vec<LayerEdge>>,
}

/// Thresholds are `sigma0` and every `y_v` in `[theta, sigma0]`. A hanging
/// edge survives pruning at `eta` iff the subtree beyond it holds a vertex
/// with `y >= eta`, so its layer is fixed by that subtree's maximum.
pub fn build_layers(trees: &[SampledTree], y: &[f64], theta: f64, sigma0: f64) -> Layers {
    let mut eta: Vec<f64> = y.iter().copied().filter(|&v| v >= theta && v <= sigma0).collect();
    eta.push(sigma0);
    eta.sort_by(|a, b| b.total_cmp(a));
    eta.dedup();
    let mut edges = vec![Vec::new(); eta.len()];
    for (j, tree) in trees.iter().enumerate() {
        for (p, c, m) in hanging_maxima(tree, y) {
            let level = m.min(sigma0);
            // the last threshold not above `level`; below theta falls into the last layer
            let i = eta.iter().position(|&e| e <= level).unwrap_or(eta.len() - 1);
            edges[i].push(LayerEdge { tree: j, u: p, v: c });
        }
    }
    Layers { eta, edges }
}

/// For each hanging edge `(parent, child)` (parent nearer the path), the
/// maximum `y` in the subtree beyond it.
fn hanging_maxima(tree: &SampledTree, y: &[f64]) -> Vec<(usize, usize, f64)> {
    let n = y.len();
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in &tree.edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::new();
    let mut stack = Vec::new();
    for &v in &tree.path {
        parent[v] = v;
        stack.push(v);
    }
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if parent[w] == usize::MAX {
                parent[w] = u;
                order.push(w);
                stack.push(w);
            }
        }
    }
    let mut best: Vec<f64> = y.to_vec();
    for &v in order.iter().rev() {
        let p = parent[v];
        best[p] = best[p].max(best[v]);
    }
    order.iter().map(|&v| (parent[v], v, best[v])).collect()
}

/// Vertices with `y_v >= sigma` joined to the sampled trees by a cheapest
/// forest rooted at the ones already covered.
pub fn pickup(y: &[f64], in_tree: &[bool], sigma: f64, cost: &SymMatrix) -> Result<Vec<(usize, usize)>> {
    let high: Vec<usize> = (0..y.len()).filter(|&v| y[v] >= sigma).collect();
    let roots: Vec<usize> = high.iter().copied().filter(|&v| in_tree[v]).collect();
    if high.iter().all(|&v| in_tree[v]) {
        return Ok(Vec::new());
    }
    mst_rooted_forest(&high, &roots, cost)
}

/// `z = beta x + sum_{eta_i >= gamma} (1 - 2 beta eta_i) chi(E_i)
///       + max(0, 1 - 2 beta sigma) chi(F)`.
pub fn build_z(
    x: &SymMatrix,
    layers: &Layers,
    gamma: f64,
    sigma: f64,
    forest: &[(usize, usize)],
    beta: f64,
) -> SymMatrix {
    let mut z = x.scaled(beta);
    for (eta, edges) in layers.eta.iter().zip(&layers.edges) {
        if *eta < gamma {
            continue;
        }
        let w = 1.0 - 2.0 * beta * eta;
        for e in edges {
            z.add(e.u, e.v, w);
        }
    }
    let w = (1.0 - 2.0 * beta * sigma).max(0.0);
    if w > 0.0 {
        for &(u, v) in forest {
            z.add(u, v, w);
        }
    }
    z
}

/// Cheapest join on the odd-degree vertices of `g`.
pub fn parity_correct(g: &MultiGraph, cost: &SymMatrix, cap: usize) -> Result<TJoin> {
    min_tjoin(cost, &g.odd_vertices(), cap)
}

/// Turns the Eulerian multigraph `h`, which contains the closed walk
/// `cycle`, into an ordered tour. Everything outside the walk is grafted in
/// as an Euler circuit at the first walk position touching it; terminals
/// are kept only at their positions on the walk and every other vertex at
/// its first occurrence. The tour starts at `cycle[0]`.
pub fn shortcut_ordered(h: &MultiGraph, cycle: &[usize], is_terminal: &[bool]) -> Result<Vec<usize>> {
    let mut rest = h.clone();
    let len = cycle.len();
    if len >= 2 {
        for i in 0..len {
            let (u, v) = (cycle[i], cycle[(i + 1) % len]);
            let pos = rest
                .edges
                .iter()
                .position(|e| e.key() == key(u, v))
                .ok_or_else(|| Error::Assertion(format!("walk edge ({u}, {v}) missing from the multigraph")))?;
            rest.edges.swap_remove(pos);
        }
    }
    let mut grafts: Vec<Vec<Vec<usize>>> = vec![Vec::new(); len];
    for comp in rest.edge_components() {
        let sub = rest.subgraph(&comp);
        let verts = sub.support_vertices();
        let at = cycle
            .iter()
            .position(|v| verts.binary_search(v).is_ok())
            .ok_or_else(|| Error::Assertion("a component of the multigraph misses the walk".into()))?;
        let circuit = euler_circuit(&sub, cycle[at])?;
        grafts[at].push(circuit[1..].to_vec());
    }

    let mut seen = vec![false; h.n];
    let mut tour = Vec::new();
    for (i, &c) in cycle.iter().enumerate() {
        if !seen[c] || is_terminal[c] {
            seen[c] = true;
            tour.push(c);
        }
        for g in &grafts[i] {
            for &v in g {
                if !is_terminal[v] && !seen[v] {
                    seen[v] = true;
                    tour.push(v);
                }
            }
        }
    }
    Ok(tour)
}

/// The closed walk obtained by concatenating the endpoint paths; the last
/// vertex of each path is dropped as it starts the next one.
pub fn concat_paths(trees: &[SampledTree]) -> Vec<usize> {
    trees
        .iter()
        .flat_map(|t| t.path[..t.path.len() - 1].iter().copied())
        .collect()
}
