//! Graph primitives shared by the relaxations and the rounding pipelines:
//! dense symmetric edge weights, multigraphs, max-flow/min-cut, rooted
//! spanning forests, Eulerian walks and metric T-joins.

mod euler;
mod flow;
mod forest;
mod tjoin;

pub use euler::{euler_circuit, euler_trail};
pub use flow::{min_cut, Cut};
pub use forest::mst_rooted_forest;
pub use tjoin::{min_tjoin, TJoin, DEFAULT_JOIN_CAP};

use serde::{Deserialize, Serialize};

/// Dense symmetric `n x n` matrix of edge weights on the complete graph.
///
/// Used for metric costs, LP edge vectors and capacities alike.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds a matrix from full rows. The caller is responsible for symmetry;
    /// see [`crate::instance::validate`] for checking it.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return None;
        }
        Some(SymMatrix {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = SymMatrix::zeros(n);
        for u in 0..n {
            for v in (u + 1)..n {
                m.set(u, v, f(u, v));
            }
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[u * self.n + v]
    }

    /// Raw (possibly asymmetric) entry access, used when validating input.
    #[inline]
    pub fn raw(&self, u: usize, v: usize) -> f64 {
        self.data[u * self.n + v]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, w: f64) {
        self.data[u * self.n + v] = w;
        self.data[v * self.n + u] = w;
    }

    #[inline]
    pub fn add(&mut self, u: usize, v: usize, w: f64) {
        if u == v {
            return;
        }
        self.data[u * self.n + v] += w;
        self.data[v * self.n + u] += w;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.n.max(1))
            .map(|r| r.to_vec())
            .take(self.n)
            .collect()
    }

    /// Iterates over `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |u| ((u + 1)..self.n).map(move |v| (u, v, self.get(u, v))))
    }

    /// Edges whose weight exceeds `tol`.
    pub fn support(&self, tol: f64) -> Vec<(usize, usize, f64)> {
        self.edges().filter(|&(_, _, w)| w > tol).collect()
    }

    /// Weight of the cut `delta(S)` where `in_set[v]` marks membership of `S`.
    pub fn cut_weight(&self, in_set: &[bool]) -> f64 {
        let mut total = 0.0;
        for u in 0..self.n {
            if !in_set[u] {
                continue;
            }
            for v in 0..self.n {
                if !in_set[v] {
                    total += self.get(u, v);
                }
            }
        }
        total
    }

    /// Weighted degree `x(delta(v))`.
    pub fn degree(&self, v: usize) -> f64 {
        (0..self.n).filter(|&u| u != v).map(|u| self.get(u, v)).sum()
    }

    /// `sum_e w_e * other_e` over unordered pairs.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        self.edges().map(|(u, v, w)| w * other.get(u, v)).sum()
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> SymMatrix {
        SymMatrix {
            n: self.n,
            data: self.data.iter().map(|w| w * factor).collect(),
        }
    }
}

/// One copy of an undirected edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub cost: f64,
}

impl Edge {
    pub fn key(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }
}

/// Undirected multigraph over vertices `0..n`. Parallel edges are kept as
/// repeated entries; the multiplicity of `{u, v}` is the number of entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MultiGraph {
    pub n: usize,
    pub edges: Vec<Edge>,
}

impl MultiGraph {
    pub fn new(n: usize) -> Self {
        MultiGraph { n, edges: Vec::new() }
    }

    pub fn add_edge(&mut self, u: usize, v: usize, cost: f64) {
        self.edges.push(Edge { u, v, cost });
    }

    pub fn add_edge_costed(&mut self, u: usize, v: usize, costs: &SymMatrix) {
        self.add_edge(u, v, costs.get(u, v));
    }

    pub fn extend(&mut self, other: &MultiGraph) {
        self.edges.extend_from_slice(&other.edges);
    }

    pub fn cost(&self) -> f64 {
        self.edges.iter().map(|e| e.cost).sum()
    }

    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        let key = (u.min(v), u.max(v));
        self.edges.iter().filter(|e| e.key() == key).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    pub fn odd_vertices(&self) -> Vec<usize> {
        self.degrees()
            .iter()
            .enumerate()
            .filter(|(_, d)| *d % 2 == 1)
            .map(|(v, _)| v)
            .collect()
    }

    /// Vertices incident to at least one edge, sorted.
    pub fn support_vertices(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        for e in &self.edges {
            seen[e.u] = true;
            seen[e.v] = true;
        }
        (0..self.n).filter(|&v| seen[v]).collect()
    }

    /// Connected components of the edge support (isolated vertices are ignored).
    /// Each component is returned as the list of indices into `self.edges`.
    pub fn edge_components(&self) -> Vec<Vec<usize>> {
        let mut dsu = Dsu::new(self.n);
        for e in &self.edges {
            dsu.union(e.u, e.v);
        }
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            by_root[dsu.find(e.u)].push(i);
        }
        by_root.into_iter().filter(|c| !c.is_empty()).collect()
    }

    /// Whether all edges lie in a single connected component.
    pub fn is_connected_support(&self) -> bool {
        self.edge_components().len() <= 1
    }

    /// Every edge duplicated once more.
    pub fn doubled(&self) -> MultiGraph {
        let mut g = self.clone();
        g.edges.extend_from_slice(&self.edges);
        g
    }

    pub fn subgraph(&self, edge_ids: &[usize]) -> MultiGraph {
        MultiGraph {
            n: self.n,
            edges: edge_ids.iter().map(|&i| self.edges[i]).collect(),
        }
    }
}

/// Disjoint-set union with path halving.
#[derive(Clone, Debug)]
pub struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if ra < rb {
            self.parent[rb] = ra;
        } else {
            self.parent[ra] = rb;
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cut_weight_counts_crossing_edges_once() {
        let mut x = SymMatrix::zeros(3);
        x.set(0, 1, 0.5);
        x.set(1, 2, 0.25);
        x.set(0, 2, 1.0);
        assert_eq!(x.cut_weight(&[true, false, false]), 1.5);
        assert_eq!(x.cut_weight(&[true, true, false]), 1.25);
        assert_eq!(x.degree(2), 1.25);
    }

    #[test]
    fn multigraph_degrees_follow_multiplicity() {
        let mut g = MultiGraph::new(3);
        g.add_edge(0, 1, 1.0);
        g.add_edge(1, 0, 1.0);
        g.add_edge(1, 2, 2.0);
        assert_eq!(g.multiplicity(0, 1), 2);
        assert_eq!(g.degrees(), vec![2, 3, 1]);
        assert_eq!(g.odd_vertices(), vec![1, 2]);
        assert_eq!(g.cost(), 4.0);
        assert_eq!(g.doubled().cost(), 8.0);
    }

    #[test]
    fn components_ignore_isolated_vertices() {
        let mut g = MultiGraph::new(6);
        g.add_edge(0, 1, 1.0);
        g.add_edge(3, 4, 1.0);
        g.add_edge(4, 5, 1.0);
        let comps = g.edge_components();
        assert_eq!(comps.len(), 2);
        assert!(!g.is_connected_support());
    }
}
