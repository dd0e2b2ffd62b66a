//! Convex combinations of trees dominated by an LP point.
//!
//! Every subtree of the support of `x` containing both endpoints is
//! enumerated; a small LP then picks weights `mu` with edge marginals at most
//! `x_e`, vertex marginals at least `y_v`, and minimum expected cost.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::SymMatrix;

/// Support threshold: edges with `x_e` at or below this are ignored.
const SUPPORT_EPS: f64 = 1e-9;
/// Slack on the marginal constraints, absorbing LP noise.
const MARGINAL_SLACK: f64 = 5e-7;
/// Trees with smaller weight are dropped before renormalising.
const MU_EPS: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecompCaps {
    /// Maximum number of support vertices.
    pub support: usize,
    /// Maximum number of candidate trees.
    pub trees: usize,
}

impl Default for DecompCaps {
    fn default() -> Self {
        DecompCaps {
            support: 11,
            trees: 2_000_000,
        }
    }
}

/// Weighted family of trees, each containing `s` and `t` (`s == t` for a
/// rooted family).
#[derive(Clone, Debug, Serialize)]
pub struct TreeDistribution {
    pub s: usize,
    pub t: usize,
    pub trees: Vec<Vec<(usize, usize)>>,
    pub mu: Vec<f64>,
    pub costs: Vec<f64>,
    /// Number of candidate trees the weights were chosen from.
    pub candidates: usize,
    #[serde(skip)]
    cumulative: Vec<f64>,
}

impl TreeDistribution {
    fn from_parts(
        s: usize,
        t: usize,
        trees: Vec<Vec<(usize, usize)>>,
        mu: Vec<f64>,
        costs: Vec<f64>,
        candidates: usize,
    ) -> Self {
        let mut acc = 0.0;
        let cumulative = mu
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        TreeDistribution {
            s,
            t,
            trees,
            mu,
            costs,
            candidates,
            cumulative,
        }
    }

    /// Index of a tree drawn with probability `mu`.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("nonempty distribution");
        let u = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.trees.len() - 1)
    }

    pub fn sample_tree<R: Rng + ?Sized>(&self, rng: &mut R) -> &[(usize, usize)] {
        &self.trees[self.sample_index(rng)]
    }

    pub fn expected_cost(&self) -> f64 {
        self.mu.iter().zip(&self.costs).map(|(m, c)| m * c).sum()
    }

    pub fn edge_marginals(&self, n: usize) -> SymMatrix {
        let mut m = SymMatrix::zeros(n);
        for (tree, &w) in self.trees.iter().zip(&self.mu) {
            for &(u, v) in tree {
                m.add(u, v, w);
            }
        }
        m
    }

    pub fn vertex_marginals(&self, n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n];
        for (tree, &w) in self.trees.iter().zip(&self.mu) {
            for v in tree_vertices(tree, self.s, self.t, n) {
                m[v] += w;
            }
        }
        m
    }

    /// Every violated distribution property, with tolerance `1e-9` on the
    /// total weight and `1e-6` on the marginals.
    pub fn check(&self, x: &SymMatrix, y: &[f64]) -> Vec<String> {
        let n = x.n();
        let mut errs = Vec::new();
        let total: f64 = self.mu.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            errs.push(format!("weights sum to {total}"));
        }
        if let Some(m) = self.mu.iter().find(|&&m| m < 0.0) {
            errs.push(format!("negative weight {m}"));
        }
        let em = self.edge_marginals(n);
        for (u, v, w) in em.edges() {
            if w > x.get(u, v) + 1e-6 {
                errs.push(format!("edge ({u},{v}) marginal {w} exceeds x = {}", x.get(u, v)));
            }
        }
        let vm = self.vertex_marginals(n);
        for v in 0..n {
            if vm[v] < y[v] - 1e-6 {
                errs.push(format!("vertex {v} marginal {} below y = {}", vm[v], y[v]));
            }
        }
        for (j, tree) in self.trees.iter().enumerate() {
            if !is_tree_containing(tree, self.s, self.t, n) {
                errs.push(format!("candidate {j} is not a tree containing both endpoints"));
            }
        }
        errs
    }
}

/// Vertices of a tree given by its edges; a tree without edges is `{s}`.
pub fn tree_vertices(edges: &[(usize, usize)], s: usize, t: usize, n: usize) -> Vec<usize> {
    let mut seen = vec![false; n];
    seen[s] = true;
    seen[t] = true;
    for &(u, v) in edges {
        seen[u] = true;
        seen[v] = true;
    }
    (0..n).filter(|&v| seen[v]).collect()
}

fn is_tree_containing(edges: &[(usize, usize)], s: usize, t: usize, n: usize) -> bool {
    let verts = tree_vertices(edges, s, t, n);
    if edges.len() + 1 != verts.len() {
        return false;
    }
    let mut dsu = crate::graph::Dsu::new(n);
    edges.iter().all(|&(u, v)| dsu.union(u, v))
}

/// Vertex sequence of the unique `s`-`t` path in a tree.
pub fn tree_path(edges: &[(usize, usize)], s: usize, t: usize, n: usize) -> Option<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut parent = vec![usize::MAX; n];
    parent[s] = s;
    let mut stack = vec![s];
    while let Some(u) = stack.pop() {
        for &w in &adj[u] {
            if parent[w] == usize::MAX {
                parent[w] = u;
                stack.push(w);
            }
        }
    }
    if parent[t] == usize::MAX {
        return None;
    }
    let mut path = vec![t];
    let mut v = t;
    while v != s {
        v = parent[v];
        path.push(v);
    }
    path.reverse();
    Some(path)
}

struct Support {
    /// Local index -> vertex.
    verts: Vec<usize>,
    /// Edge list in local indices.
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>,
}

fn support_of(x: &SymMatrix, s: usize, t: usize) -> Support {
    let n = x.n();
    let sup = x.support(SUPPORT_EPS);
    let mut used = vec![false; n];
    used[s] = true;
    used[t] = true;
    for &(u, v, _) in &sup {
        used[u] = true;
        used[v] = true;
    }
    let verts: Vec<usize> = (0..n).filter(|&v| used[v]).collect();
    let mut local = vec![usize::MAX; n];
    for (i, &v) in verts.iter().enumerate() {
        local[v] = i;
    }
    let edges: Vec<(usize, usize)> = sup.iter().map(|&(u, v, _)| (local[u], local[v])).collect();
    let mut adj = vec![Vec::new(); verts.len()];
    for (id, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, id));
        adj[b].push((a, id));
    }
    Support { verts, edges, adj }
}

struct Enumerator<'a> {
    sup: &'a Support,
    required: u32,
    cap: usize,
    out: Vec<u128>,
    overflow: bool,
}

impl Enumerator<'_> {
    /// Branches on the last undecided frontier edge: leave it out, or take it
    /// together with its outer endpoint.
    fn grow(&mut self, vmask: u32, emask: u128, mut frontier: Vec<usize>) {
        if self.overflow {
            return;
        }
        frontier.retain(|&e| {
            let (a, b) = self.sup.edges[e];
            (vmask >> a & 1) + (vmask >> b & 1) == 1
        });
        let Some(e) = frontier.pop() else {
            if vmask & self.required == self.required {
                if self.out.len() >= self.cap {
                    self.overflow = true;
                } else {
                    self.out.push(emask);
                }
            }
            return;
        };
        self.grow(vmask, emask, frontier.clone());
        let (a, b) = self.sup.edges[e];
        let w = if vmask >> a & 1 == 1 { b } else { a };
        let next = vmask | 1 << w;
        for &(z, id) in &self.sup.adj[w] {
            if next >> z & 1 == 0 {
                frontier.push(id);
            }
        }
        self.grow(next, emask | 1u128 << e, frontier);
    }
}

/// All subtrees of the support of `x` containing `s`, `t` and every vertex in
/// `required`, as edge lists in original indices.
pub fn enumerate_trees(
    x: &SymMatrix,
    s: usize,
    t: usize,
    required: &[usize],
    caps: DecompCaps,
) -> Result<Vec<Vec<(usize, usize)>>> {
    let sup = support_of(x, s, t);
    if sup.verts.len() > caps.support {
        return Err(Error::SizeCap {
            what: "support",
            actual: sup.verts.len(),
            cap: caps.support,
        });
    }
    let local = |v: usize| sup.verts.binary_search(&v).ok();
    let ls = local(s).expect("s in support");
    let lt = local(t).expect("t in support");
    let mut req: u32 = 1 << ls | 1 << lt;
    for &v in required {
        match local(v) {
            Some(l) => req |= 1 << l,
            None => return Ok(Vec::new()),
        }
    }
    let mut en = Enumerator {
        sup: &sup,
        required: req,
        cap: caps.trees,
        out: Vec::new(),
        overflow: false,
    };
    let frontier: Vec<usize> = sup.adj[ls].iter().map(|&(_, id)| id).collect();
    en.grow(1 << ls, 0, frontier);
    if en.overflow {
        return Err(Error::SizeCap {
            what: "candidate-trees",
            actual: caps.trees + 1,
            cap: caps.trees,
        });
    }
    Ok(en
        .out
        .iter()
        .map(|&mask| {
            (0..sup.edges.len())
                .filter(|&e| mask >> e & 1 == 1)
                .map(|e| {
                    let (a, b) = sup.edges[e];
                    (sup.verts[a], sup.verts[b])
                })
                .collect()
        })
        .collect())
}

/// Cheapest distribution over subtrees of the support of `x_i` containing
/// `s` and `t` with edge marginals `<= x` and vertex marginals `>= y`.
/// Vertices with `y_v = 1` are required in every tree.
pub fn decompose(
    x: &SymMatrix,
    y: &[f64],
    s: usize,
    t: usize,
    cost: &SymMatrix,
    caps: DecompCaps,
) -> Result<TreeDistribution> {
    let n = x.n();
    let required: Vec<usize> = (0..n).filter(|&v| v != s && v != t && y[v] >= 1.0 - 1e-9).collect();
    let trees = enumerate_trees(x, s, t, &required, caps)?;
    if trees.is_empty() {
        return Err(Error::Assertion(format!(
            "no subtree of the support contains {s}, {t} and {required:?}"
        )));
    }
    let costs: Vec<f64> = trees
        .iter()
        .map(|tr| tr.iter().map(|&(u, v)| cost.get(u, v)).sum())
        .collect();

    let mut p = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<_> = costs.iter().map(|&c| p.add_var(c, (0.0, 1.0))).collect();
    p.add_constraint(vars.iter().map(|&v| (v, 1.0)), ComparisonOp::Eq, 1.0);
    let sup = x.support(SUPPORT_EPS);
    for &(u, v, w) in &sup {
        let key = (u.min(v), u.max(v));
        let terms: Vec<_> = trees
            .iter()
            .zip(&vars)
            .filter(|(tr, _)| tr.iter().any(|&(a, b)| (a.min(b), a.max(b)) == key))
            .map(|(_, &var)| (var, 1.0))
            .collect();
        if !terms.is_empty() {
            p.add_constraint(terms, ComparisonOp::Le, w + MARGINAL_SLACK);
        }
    }
    for v in 0..n {
        if v == s || v == t || y[v] <= MARGINAL_SLACK || required.contains(&v) {
            continue;
        }
        let terms: Vec<_> = trees
            .iter()
            .zip(&vars)
            .filter(|(tr, _)| tr.iter().any(|&(a, b)| a == v || b == v))
            .map(|(_, &var)| (var, 1.0))
            .collect();
        if terms.is_empty() {
            return Err(Error::Assertion(format!(
                "vertex {v} with y = {} lies in no candidate tree",
                y[v]
            )));
        }
        p.add_constraint(terms, ComparisonOp::Ge, y[v] - MARGINAL_SLACK);
    }
    let sol = p
        .solve()
        .map_err(|e| Error::Assertion(format!("tree decomposition LP failed: {e:?}")))?
        .into_solution()
        .map_err(|_| Error::Assertion("tree decomposition LP interrupted".into()))?;

    let candidates = trees.len();
    let mut kept_trees = Vec::new();
    let mut kept_mu = Vec::new();
    let mut kept_costs = Vec::new();
    for ((tree, var), c) in trees.into_iter().zip(&vars).zip(costs) {
        let m = sol.var_value_raw(*var);
        if m > MU_EPS {
            kept_trees.push(tree);
            kept_mu.push(m);
            kept_costs.push(c);
        }
    }
    let total: f64 = kept_mu.iter().sum();
    for m in &mut kept_mu {
        *m /= total;
    }
    Ok(TreeDistribution::from_parts(
        s, t, kept_trees, kept_mu, kept_costs, candidates,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_cost(n: usize) -> SymMatrix {
        SymMatrix::from_fn(n, |_, _| 1.0)
    }

    #[test]
    fn path_gives_single_tree() {
        let mut x = SymMatrix::zeros(4);
        x.set(0, 2, 1.0);
        x.set(2, 3, 1.0);
        x.set(3, 1, 1.0);
        let y = [0.5, 0.5, 1.0, 1.0];
        let d = decompose(&x, &y, 0, 1, &unit_cost(4), DecompCaps::default()).unwrap();
        assert_eq!(d.trees.len(), 1);
        assert!((d.mu[0] - 1.0).abs() < 1e-12);
        assert!(d.check(&x, &y).is_empty());
        assert_eq!(tree_path(&d.trees[0], 0, 1, 4).unwrap(), vec![0, 2, 3, 1]);
    }

    #[test]
    fn two_half_paths_split_evenly() {
        let mut x = SymMatrix::zeros(4);
        x.set(0, 2, 0.5);
        x.set(2, 1, 0.5);
        x.set(0, 3, 0.5);
        x.set(3, 1, 0.5);
        let y = [0.5, 0.5, 0.5, 0.5];
        let d = decompose(&x, &y, 0, 1, &unit_cost(4), DecompCaps::default()).unwrap();
        assert_eq!(d.candidates, 6);
        assert_eq!(d.trees.len(), 2);
        for m in &d.mu {
            assert!((m - 0.5).abs() < 1e-6);
        }
        assert!(d.check(&x, &y).is_empty());
    }

    #[test]
    fn sampling_frequencies_match_weights() {
        let mut x = SymMatrix::zeros(4);
        x.set(0, 2, 0.5);
        x.set(2, 1, 0.5);
        x.set(0, 3, 0.5);
        x.set(3, 1, 0.5);
        let y = [0.5, 0.5, 0.5, 0.5];
        let d = decompose(&x, &y, 0, 1, &unit_cost(4), DecompCaps::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws = 10_000;
        let hits = (0..draws).filter(|_| d.sample_index(&mut rng) == 0).count();
        let sd = (0.25f64 / draws as f64).sqrt();
        assert!((hits as f64 / draws as f64 - 0.5).abs() < 3.0 * sd);
    }

    #[test]
    fn rooted_family_may_be_trivial() {
        let x = SymMatrix::zeros(3);
        let d = decompose(&x, &[1.0, 0.0, 0.0], 0, 0, &unit_cost(3), DecompCaps::default()).unwrap();
        assert_eq!(d.trees, vec![Vec::<(usize, usize)>::new()]);
    }

    #[test]
    fn support_cap_enforced() {
        let x = SymMatrix::from_fn(13, |_, _| 0.1);
        let err = enumerate_trees(&x, 0, 1, &[], DecompCaps::default()).unwrap_err();
        assert!(matches!(err, Error::SizeCap { what: "support", .. }));
    }

    /// Matrix-tree theorem: number of spanning trees of the graph induced by
    /// `verts` (determinant of a reduced Laplacian).
    fn spanning_tree_count(adj: &[Vec<bool>], verts: &[usize]) -> f64 {
        let m = verts.len();
        if m <= 1 {
            return 1.0;
        }
        let mut lap = vec![vec![0.0f64; m - 1]; m - 1];
        for i in 1..m {
            for j in 0..m {
                if i != j && adj[verts[i]][verts[j]] {
                    lap[i - 1][i - 1] += 1.0;
                    if j >= 1 {
                        lap[i - 1][j - 1] -= 1.0;
                    }
                }
            }
        }
        let d = m - 1;
        let mut det = 1.0;
        for c in 0..d {
            let piv = (c..d)
                .max_by(|&a, &b| lap[a][c].abs().total_cmp(&lap[b][c].abs()))
                .unwrap();
            if lap[piv][c].abs() < 1e-12 {
                return 0.0;
            }
            if piv != c {
                lap.swap(piv, c);
                det = -det;
            }
            det *= lap[c][c];
            for r in (c + 1)..d {
                let f = lap[r][c] / lap[c][c];
                for k in c..d {
                    lap[r][k] -= f * lap[c][k];
                }
            }
        }
        det.round()
    }

    #[test]
    fn enumeration_count_matches_matrix_tree_theorem() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 3..=7 {
            for _ in 0..5 {
                let x = SymMatrix::from_fn(n, |_, _| if rng.gen_bool(0.55) { 0.5 } else { 0.0 });
                let adj: Vec<Vec<bool>> = (0..n)
                    .map(|u| (0..n).map(|v| u != v && x.get(u, v) > 0.0).collect())
                    .collect();
                let (s, t) = (0, n - 1);
                let mut expected = 0.0;
                for mask in 0u32..(1 << n) {
                    if mask & 1 == 0 || mask >> (n - 1) & 1 == 0 {
                        continue;
                    }
                    let verts: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
                    expected += spanning_tree_count(&adj, &verts);
                }
                let trees = enumerate_trees(&x, s, t, &[], DecompCaps::default()).unwrap();
                assert_eq!(trees.len() as f64, expected);
                for tr in &trees {
                    assert!(is_tree_containing(tr, s, t, n));
                }
            }
        }
    }
}
