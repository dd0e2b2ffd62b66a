//! Problem instances: metric costs, penalties and terminals, plus the JSON
//! file format, random generators and solution evaluation.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::graph::SymMatrix;

pub type CostMatrix = SymMatrix;

/// Vertex penalty. `Infinite` marks a vertex that must be visited; it never
/// appears as a float inside an LP objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Penalty {
    Finite(f64),
    Infinite,
}

impl Penalty {
    pub fn is_infinite(self) -> bool {
        matches!(self, Penalty::Infinite)
    }

    /// Numeric value, `f64::INFINITY` for infinite penalties.
    pub fn value(self) -> f64 {
        match self {
            Penalty::Finite(p) => p,
            Penalty::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for Penalty {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Penalty::Finite(p) => s.serialize_f64(sig12(p)),
            Penalty::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Terminal structure: a cyclic order `o_1..o_k` or a list of `(s_i, t_i)` pairs.
#[derive(Clone, Debug, PartialEq)]
pub enum Terminals {
    Ordered(Vec<usize>),
    Pairs(Vec<(usize, usize)>),
}

impl Terminals {
    /// Number of stroll components: `k` consecutive pairs for an ordered
    /// instance, the number of pairs otherwise.
    pub fn k(&self) -> usize {
        match self {
            Terminals::Ordered(o) => o.len(),
            Terminals::Pairs(p) => p.len(),
        }
    }

    /// Endpoints `(s_i, t_i)` of every component. For an ordered instance
    /// component `i` runs from `o_i` to `o_{i+1}` (cyclically).
    pub fn components(&self) -> Vec<(usize, usize)> {
        match self {
            Terminals::Ordered(o) => (0..o.len()).map(|i| (o[i], o[(i + 1) % o.len()])).collect(),
            Terminals::Pairs(p) => p.clone(),
        }
    }

    /// All terminal vertices, in the order given.
    pub fn vertices(&self) -> Vec<usize> {
        match self {
            Terminals::Ordered(o) => o.clone(),
            Terminals::Pairs(p) => p.iter().flat_map(|&(s, t)| [s, t]).collect(),
        }
    }

    pub fn is_ordered(&self) -> bool {
        matches!(self, Terminals::Ordered(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricInstance {
    pub n: usize,
    pub cost: CostMatrix,
    pub penalty: Vec<Penalty>,
    pub terminals: Terminals,
    /// Planar coordinates when the costs are Euclidean distances.
    pub coords: Option<Vec<[f64; 2]>>,
}

impl MetricInstance {
    pub fn new(cost: CostMatrix, penalty: Vec<Penalty>, terminals: Terminals) -> Self {
        MetricInstance {
            n: cost.n(),
            cost,
            penalty,
            terminals,
            coords: None,
        }
    }

    pub fn is_terminal_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n];
        for v in self.terminals.vertices() {
            if v < self.n {
                mask[v] = true;
            }
        }
        mask
    }

    /// Penalty as used by the algorithms: terminals always carry 0.
    pub fn effective_penalty(&self, v: usize) -> Penalty {
        if self.terminals.vertices().contains(&v) {
            Penalty::Finite(0.0)
        } else {
            self.penalty[v]
        }
    }

    pub fn diameter(&self) -> f64 {
        self.cost.max_entry()
    }

    /// Absolute comparison tolerance, scaled by the diameter.
    pub fn tolerance(&self) -> f64 {
        1e-9 * self.diameter().max(1.0)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let raw = RawInstance {
            n: self.n,
            coords: self
                .coords
                .as_ref()
                .map(|c| c.iter().map(|p| [sig12(p[0]), sig12(p[1])]).collect()),
            cost: Some(
                self.cost
                    .rows()
                    .into_iter()
                    .map(|r| r.into_iter().map(sig12).collect())
                    .collect(),
            ),
            penalty: self
                .penalty
                .iter()
                .map(|p| serde_json::to_value(p).expect("penalty serializes"))
                .collect(),
            terminals: match &self.terminals {
                Terminals::Ordered(o) => Some(o.clone()),
                Terminals::Pairs(_) => None,
            },
            pairs: match &self.terminals {
                Terminals::Pairs(p) => Some(p.iter().map(|&(s, t)| [s, t]).collect()),
                Terminals::Ordered(_) => None,
            },
        };
        serde_json::to_string_pretty(&raw).expect("instance serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawInstance = serde_json::from_str(text).map_err(|e| Error::parse("instance", e.to_string()))?;
        let n = raw.n;
        let cost = match (&raw.cost, &raw.coords) {
            (Some(rows), _) => {
                if rows.len() != n {
                    return Err(Error::parse(
                        "instance",
                        format!("field `cost`: expected {n} rows, found {}", rows.len()),
                    ));
                }
                if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
                    return Err(Error::parse(
                        "instance",
                        format!("field `cost`: row {i} has {} entries, expected {n}", r.len()),
                    ));
                }
                SymMatrix::from_rows(rows).expect("square checked")
            }
            (None, Some(pts)) => {
                if pts.len() != n {
                    return Err(Error::parse(
                        "instance",
                        format!("field `coords`: expected {n} points, found {}", pts.len()),
                    ));
                }
                euclidean_matrix(pts)
            }
            (None, None) => return Err(Error::parse("instance", "missing field `cost` (or `coords`)")),
        };
        if raw.penalty.len() != n {
            return Err(Error::parse(
                "instance",
                format!("field `penalty`: expected {n} entries, found {}", raw.penalty.len()),
            ));
        }
        let penalty = raw
            .penalty
            .iter()
            .enumerate()
            .map(|(i, v)| {
                parse_penalty(v).ok_or_else(|| {
                    Error::parse(
                        "instance",
                        format!("field `penalty`[{i}]: expected a number or \"inf\", found {v}"),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let terminals = match (raw.terminals, raw.pairs) {
            (Some(o), None) => Terminals::Ordered(o),
            (None, Some(p)) => Terminals::Pairs(p.into_iter().map(|[s, t]| (s, t)).collect()),
            (Some(_), Some(_)) => {
                return Err(Error::parse(
                    "instance",
                    "fields `terminals` and `pairs` are mutually exclusive",
                ))
            }
            (None, None) => return Err(Error::parse("instance", "missing field `terminals` (or `pairs`)")),
        };
        Ok(MetricInstance {
            n,
            cost,
            penalty,
            terminals,
            coords: raw.coords,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cost: Option<Vec<Vec<f64>>>,
    penalty: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    terminals: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pairs: Option<Vec<[usize; 2]>>,
}

fn parse_penalty(v: &Value) -> Option<Penalty> {
    match v {
        Value::Number(x) => x.as_f64().map(Penalty::Finite),
        Value::String(s) if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity") => Some(Penalty::Infinite),
        _ => None,
    }
}

/// Rounds to 12 significant digits, the precision used in files.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn round_grid(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn euclidean_matrix(pts: &[[f64; 2]]) -> SymMatrix {
    SymMatrix::from_fn(pts.len(), |a, b| {
        ((pts[a][0] - pts[b][0]).powi(2) + (pts[a][1] - pts[b][1]).powi(2)).sqrt()
    })
}

/// One violated instance invariant, with witness indices.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    SizeMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    NonFiniteCost {
        u: usize,
        v: usize,
    },
    NegativeCost {
        u: usize,
        v: usize,
        value: f64,
    },
    NonzeroDiagonal {
        v: usize,
        value: f64,
    },
    Asymmetric {
        u: usize,
        v: usize,
    },
    TriangleInequality {
        u: usize,
        v: usize,
        w: usize,
        excess: f64,
    },
    NegativePenalty {
        v: usize,
        value: f64,
    },
    TooFewTerminals {
        k: usize,
    },
    TerminalOutOfRange {
        v: usize,
    },
    DuplicateTerminal {
        v: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SizeMismatch { field, expected, found } => {
                write!(f, "{field}: expected length {expected}, found {found}")
            }
            Violation::NonFiniteCost { u, v } => write!(f, "cost[{u}][{v}] is not finite"),
            Violation::NegativeCost { u, v, value } => write!(f, "cost[{u}][{v}] = {value} < 0"),
            Violation::NonzeroDiagonal { v, value } => write!(f, "cost[{v}][{v}] = {value} != 0"),
            Violation::Asymmetric { u, v } => write!(f, "cost[{u}][{v}] != cost[{v}][{u}]"),
            Violation::TriangleInequality { u, v, w, excess } => write!(
                f,
                "triangle inequality fails: cost[{u}][{w}] exceeds cost[{u}][{v}] + cost[{v}][{w}] by {excess}"
            ),
            Violation::NegativePenalty { v, value } => write!(f, "penalty[{v}] = {value} < 0"),
            Violation::TooFewTerminals { k } => write!(f, "need at least 2 terminals (or 1 pair), found {k}"),
            Violation::TerminalOutOfRange { v } => write!(f, "terminal {v} out of range"),
            Violation::DuplicateTerminal { v } => write!(f, "terminal {v} listed twice"),
        }
    }
}

/// Every violated instance invariant. Never fails.
pub fn validate(inst: &MetricInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = inst.n;
    if inst.cost.n() != n {
        out.push(Violation::SizeMismatch {
            field: "cost",
            expected: n,
            found: inst.cost.n(),
        });
        return out;
    }
    if inst.penalty.len() != n {
        out.push(Violation::SizeMismatch {
            field: "penalty",
            expected: n,
            found: inst.penalty.len(),
        });
    }
    let mut numeric_ok = true;
    for u in 0..n {
        let d = inst.cost.raw(u, u);
        if d != 0.0 {
            out.push(Violation::NonzeroDiagonal { v: u, value: d });
        }
        for v in 0..n {
            let c = inst.cost.raw(u, v);
            if !c.is_finite() {
                out.push(Violation::NonFiniteCost { u, v });
                numeric_ok = false;
            } else if c < 0.0 {
                out.push(Violation::NegativeCost { u, v, value: c });
            }
            if u < v && inst.cost.raw(u, v) != inst.cost.raw(v, u) {
                out.push(Violation::Asymmetric { u, v });
            }
        }
    }
    if numeric_ok {
        let tol = 1e-9 * inst.cost.max_entry();
        for u in 0..n {
            for w in (u + 1)..n {
                for v in 0..n {
                    if v == u || v == w {
                        continue;
                    }
                    let excess = inst.cost.raw(u, w) - inst.cost.raw(u, v) - inst.cost.raw(v, w);
                    if excess > tol {
                        out.push(Violation::TriangleInequality { u, v, w, excess });
                    }
                }
            }
        }
    }
    for (v, p) in inst.penalty.iter().enumerate() {
        if let Penalty::Finite(x) = *p {
            if x.is_nan() || x < 0.0 {
                out.push(Violation::NegativePenalty { v, value: x });
            }
        }
    }
    let k = inst.terminals.k();
    let min_k = if inst.terminals.is_ordered() { 2 } else { 1 };
    if k < min_k {
        out.push(Violation::TooFewTerminals { k });
    }
    let mut seen = vec![false; n];
    for v in inst.terminals.vertices() {
        if v >= n {
            out.push(Violation::TerminalOutOfRange { v });
        } else if seen[v] {
            out.push(Violation::DuplicateTerminal { v });
        } else {
            seen[v] = true;
        }
    }
    out
}

/// All-pairs shortest-path completion of a sparse, nonnegatively weighted
/// undirected graph (Floyd–Warshall). Parallel edges keep the cheapest weight.
pub fn metric_closure(n: usize, edges: &[(usize, usize, f64)]) -> Result<CostMatrix> {
    let mut d = SymMatrix::from_fn(n, |_, _| f64::INFINITY);
    for &(u, v, w) in edges {
        if u >= n || v >= n {
            return Err(Error::InvalidInstance(format!("edge ({u}, {v}) out of range")));
        }
        if !(w >= 0.0) {
            return Err(Error::InvalidInstance(format!(
                "edge ({u}, {v}) has negative or NaN weight {w}"
            )));
        }
        if u != v && w < d.get(u, v) {
            d.set(u, v, w);
        }
    }
    floyd_warshall(&mut d);
    if let Some((u, v, _)) = d.edges().find(|&(_, _, w)| !w.is_finite()) {
        return Err(Error::InvalidInstance(format!(
            "graph is disconnected: no path between {u} and {v}"
        )));
    }
    Ok(d)
}

/// Metric closure of a complete weight matrix.
pub fn closure_of(cost: &CostMatrix) -> CostMatrix {
    let mut d = cost.clone();
    floyd_warshall(&mut d);
    d
}

fn floyd_warshall(d: &mut SymMatrix) {
    let n = d.n();
    for k in 0..n {
        for u in 0..n {
            let duk = d.get(u, k);
            if !duk.is_finite() || u == k {
                continue;
            }
            for v in (u + 1)..n {
                if v == k {
                    continue;
                }
                let via = duk + d.get(k, v);
                if via < d.get(u, v) {
                    d.set(u, v, via);
                }
            }
        }
    }
}

/// Uniform points in the unit square; the first `k` points are the ordered
/// terminals `0..k`, penalties uniform in `[0, penalty_scale]`.
pub fn gen_euclidean(n: usize, k: usize, seed: u64, penalty_scale: f64) -> Result<MetricInstance> {
    if k < 2 || n < k {
        return Err(Error::InvalidArgument(format!(
            "gen_euclidean needs n >= k >= 2 (got n={n}, k={k})"
        )));
    }
    let mut inst = gen_points(n, seed, penalty_scale);
    inst.terminals = Terminals::Ordered((0..k).collect());
    Ok(inst)
}

/// As [`gen_euclidean`] but with `k` terminal pairs `(0,1), (2,3), ...`.
pub fn gen_euclidean_pairs(n: usize, k: usize, seed: u64, penalty_scale: f64) -> Result<MetricInstance> {
    if k < 1 || n < 2 * k {
        return Err(Error::InvalidArgument(format!(
            "gen_euclidean_pairs needs n >= 2k >= 2 (got n={n}, k={k})"
        )));
    }
    let mut inst = gen_points(n, seed, penalty_scale);
    inst.terminals = Terminals::Pairs((0..k).map(|i| (2 * i, 2 * i + 1)).collect());
    Ok(inst)
}

fn gen_points(n: usize, seed: u64, penalty_scale: f64) -> MetricInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let penalty = (0..n)
        .map(|_| Penalty::Finite(round_grid(rng.gen::<f64>() * penalty_scale)))
        .collect();
    let raw = euclidean_matrix(&pts);
    let rounded = SymMatrix::from_fn(n, |a, b| round_grid(raw.get(a, b)));
    // rounding can break the triangle inequality by ~1e-9 on near-collinear triples
    let cost = closure_of(&rounded);
    MetricInstance {
        n,
        cost,
        penalty,
        terminals: Terminals::Ordered(Vec::new()),
        coords: Some(pts),
    }
}

/// The visiting structure of a solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum Route {
    /// Cyclic vertex sequence, starting at `o_1`, without the closing repeat.
    OrderedTour { tour: Vec<usize> },
    /// One vertex sequence per terminal pair, from `s_i` to `t_i`.
    PathCollection { paths: Vec<Vec<usize>> },
}

impl Route {
    pub fn vertices(&self) -> Vec<usize> {
        match self {
            Route::OrderedTour { tour } => tour.clone(),
            Route::PathCollection { paths } => paths.iter().flatten().copied().collect(),
        }
    }

    pub fn cost(&self, c: &CostMatrix) -> f64 {
        match self {
            Route::OrderedTour { tour } => {
                if tour.len() < 2 {
                    return 0.0;
                }
                (0..tour.len())
                    .map(|i| c.get(tour[i], tour[(i + 1) % tour.len()]))
                    .sum()
            }
            Route::PathCollection { paths } => paths
                .iter()
                .map(|p| p.windows(2).map(|w| c.get(w[0], w[1])).sum::<f64>())
                .sum(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Solution {
    pub route: Route,
    pub covered: Vec<usize>,
    pub tour_cost: f64,
    #[serde(with = "crate::report::float_or_inf")]
    pub penalty_paid: f64,
    #[serde(with = "crate::report::float_or_inf")]
    pub objective: f64,
}

impl Solution {
    /// Computes cost, covered set and penalties of `route`.
    pub fn evaluate(inst: &MetricInstance, route: Route) -> Solution {
        let mut covered = route.vertices();
        covered.sort_unstable();
        covered.dedup();
        let tour_cost = route.cost(&inst.cost);
        let penalty_paid = penalty_outside(inst, &covered);
        Solution {
            route,
            covered,
            tour_cost,
            penalty_paid,
            objective: tour_cost + penalty_paid,
        }
    }

    /// Every violated solution invariant, as human-readable messages.
    pub fn check(&self, inst: &MetricInstance) -> Vec<String> {
        let mut errs = Vec::new();
        let verts = self.route.vertices();
        let mut seen = vec![false; inst.n];
        for &v in &verts {
            if v >= inst.n {
                errs.push(format!("vertex {v} out of range"));
                return errs;
            }
            if seen[v] {
                errs.push(format!("vertex {v} visited more than once"));
            }
            seen[v] = true;
        }
        match (&self.route, &inst.terminals) {
            (Route::OrderedTour { tour }, Terminals::Ordered(o)) => {
                let order: Vec<usize> = tour.iter().copied().filter(|v| o.contains(v)).collect();
                let rotated = match order.iter().position(|&v| v == o[0]) {
                    Some(p) => order[p..].iter().chain(&order[..p]).copied().collect(),
                    None => order.clone(),
                };
                if rotated != *o {
                    errs.push(format!("terminals visited in order {order:?}, expected {o:?}"));
                }
            }
            (Route::PathCollection { paths }, Terminals::Pairs(p)) => {
                if paths.len() != p.len() {
                    errs.push(format!("{} paths for {} pairs", paths.len(), p.len()));
                }
                for (i, (path, &(s, t))) in paths.iter().zip(p).enumerate() {
                    if path.first() != Some(&s) || path.last() != Some(&t) {
                        errs.push(format!("path {i} does not run from {s} to {t}"));
                    }
                    if let Some(&o) = path[1..path.len().saturating_sub(1)]
                        .iter()
                        .find(|v| inst.terminals.vertices().contains(v))
                    {
                        errs.push(format!("path {i} passes through terminal {o}"));
                    }
                }
            }
            _ => errs.push("route variant does not match the instance terminals".into()),
        }
        let mut covered = verts;
        covered.sort_unstable();
        covered.dedup();
        if covered != self.covered {
            errs.push("covered set does not match the route".into());
        }
        let tol = inst.tolerance();
        let tour_cost = self.route.cost(&inst.cost);
        if (tour_cost - self.tour_cost).abs() > tol {
            errs.push(format!(
                "stored tour cost {} != recomputed {}",
                self.tour_cost, tour_cost
            ));
        }
        let pen = penalty_outside(inst, &covered);
        let pen_ok = if pen.is_finite() {
            (pen - self.penalty_paid).abs() <= tol
        } else {
            self.penalty_paid == pen
        };
        if !pen_ok {
            errs.push(format!("stored penalty {} != recomputed {}", self.penalty_paid, pen));
        }
        let obj = tour_cost + pen;
        let obj_ok = if obj.is_finite() {
            (obj - self.objective).abs() <= tol
        } else {
            self.objective == obj
        };
        if !obj_ok {
            errs.push(format!("stored objective {} != recomputed {}", self.objective, obj));
        }
        errs
    }
}

fn penalty_outside(inst: &MetricInstance, covered_sorted: &[usize]) -> f64 {
    (0..inst.n)
        .filter(|v| covered_sorted.binary_search(v).is_err())
        .map(|v| inst.effective_penalty(v).value())
        .sum::<f64>()
        + 0.0 // an empty f64 sum is -0.0
}
