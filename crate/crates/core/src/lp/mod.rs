//! The stroll relaxation for ordered terminals and terminal pairs, and the
//! rooted relaxation of the plain prize-collecting TSP on a contracted
//! instance. Solved either with every cut enumerated up front (small `n`) or
//! by a cutting-plane loop driven by min-cut separation.

mod model;
mod separation;

pub use separation::{separate, separate_all, ViolatedCut, SEPARATION_TOL};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::SymMatrix;
use crate::instance::{MetricInstance, Penalty, Terminals};
use model::{solve_model, CutRhs, CutRow, ModelSpec, RawSolution};

/// Largest `n` accepted by [`LpMode::Enumerated`].
pub const ENUMERATED_MAX_N: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpVariant {
    Ordered,
    Pairs,
    PctspContracted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpMode {
    Enumerated,
    CuttingPlane,
}

/// A point of the relaxation, optimal unless built by [`StrollLpSolution::mix`].
/// For the contracted variant all indices refer to the contracted instance
/// (root = 0).
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StrollLpSolution {
    pub variant: LpVariant,
    pub mode: LpMode,
    /// Component endpoints `(s_i, t_i)`; a rooted component has `s == t`.
    pub components: Vec<(usize, usize)>,
    pub x: Vec<SymMatrix>,
    pub y: Vec<Vec<f64>>,
    /// `x_e = sum_i x_{i,e}`.
    pub x_total: SymMatrix,
    /// `y_v = sum_i y_{i,v}`, with every terminal reported as 1.
    pub y_total: Vec<f64>,
    pub connection_cost: f64,
    pub penalty_cost: f64,
    pub objective: f64,
    pub rounds: usize,
    pub cuts: usize,
    #[serde(skip)]
    spec: ModelSpec,
}

impl StrollLpSolution {
    pub fn n(&self) -> usize {
        self.x_total.n()
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// `V_rho = {v : y_v >= rho}`.
    pub fn v_rho(&self, rho: f64) -> VRho {
        VRho::new(&self.y_total, rho)
    }

    /// Non-terminal vertices whose aggregate `y_v` sits at the explicit cap 1
    /// although they carry a finite penalty.
    pub fn y_cap_tight(&self) -> Vec<usize> {
        let endpoints: Vec<usize> = self.components.iter().flat_map(|&(s, t)| [s, t]).collect();
        (0..self.n())
            .filter(|v| !endpoints.contains(v))
            .filter(|&v| !self.spec.penalty[v].is_infinite() && self.spec.fixed[v].is_none())
            .filter(|&v| self.y_total[v] >= 1.0 - 1e-7)
            .collect()
    }

    /// `c(x_i)` for component `i`.
    pub fn component_cost(&self, i: usize) -> f64 {
        self.x[i].dot(&self.spec.cost)
    }

    /// The point `lambda * self + (1 - lambda) * other`, priced with the
    /// penalties of `self`. Both must come from relaxations with the same
    /// metric, components and pins; the polytope does not depend on the
    /// penalties, so the result is feasible but in general not optimal.
    pub fn mix(&self, other: &StrollLpSolution, lambda: f64) -> Result<StrollLpSolution> {
        let (a, b) = (&self.spec, &other.spec);
        let required_differ = a
            .penalty
            .iter()
            .zip(&b.penalty)
            .any(|(p, q)| p.is_infinite() != q.is_infinite());
        if a.comps != b.comps || a.cost != b.cost || a.fixed != b.fixed || a.zero != b.zero || required_differ {
            return Err(Error::InvalidArgument("points belong to different relaxations".into()));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!("mixing weight {lambda} outside [0, 1]")));
        }
        let n = self.n();
        let raw = RawSolution {
            x: self
                .x
                .iter()
                .zip(&other.x)
                .map(|(p, q)| SymMatrix::from_fn(n, |u, v| lambda * p.get(u, v) + (1.0 - lambda) * q.get(u, v)))
                .collect(),
            y: self
                .y
                .iter()
                .zip(&other.y)
                .map(|(p, q)| p.iter().zip(q).map(|(s, t)| lambda * s + (1.0 - lambda) * t).collect())
                .collect(),
        };
        let endpoints: Vec<usize> = self.components.iter().flat_map(|&(s, t)| [s, t]).collect();
        let terminals: Vec<usize> = (0..n).filter(|v| endpoints.contains(v)).collect();
        Ok(assemble(a.clone(), raw, self.variant, self.mode, 0, 0, &terminals))
    }
}

/// Vertices whose aggregate LP coverage reaches a threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VRho {
    pub rho: f64,
    pub vertices: Vec<usize>,
}

impl VRho {
    pub fn new(y: &[f64], rho: f64) -> Self {
        VRho {
            rho,
            vertices: (0..y.len()).filter(|&v| y[v] >= rho).collect(),
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// An instance with a set of vertices merged into a single root (index 0).
#[derive(Clone, Debug)]
pub struct ContractedInstance {
    pub cost: SymMatrix,
    pub penalty: Vec<Penalty>,
    /// Original vertex of each contracted index; `original[0]` is unused.
    pub original: Vec<usize>,
    /// For each contracted index `v >= 1`, the merged vertex closest to it
    /// (smallest index on ties). `attach[0]` is unused.
    pub attach: Vec<usize>,
}

impl ContractedInstance {
    /// Merges `merged` into a root with infinite penalty.
    /// `cost(r, v) = min_{o in merged} cost(o, v)`.
    pub fn new(inst: &MetricInstance, merged: &[usize]) -> Self {
        let mut merged = merged.to_vec();
        merged.sort_unstable();
        let rest: Vec<usize> = (0..inst.n).filter(|v| merged.binary_search(v).is_err()).collect();
        let m = rest.len() + 1;
        let mut original = vec![usize::MAX; m];
        let mut attach = vec![usize::MAX; m];
        let mut cost = SymMatrix::zeros(m);
        for (j, &v) in rest.iter().enumerate() {
            original[j + 1] = v;
            let (best, c) =
                merged
                    .iter()
                    .map(|&o| (o, inst.cost.get(o, v)))
                    .fold(
                        (usize::MAX, f64::INFINITY),
                        |acc, cur| if cur.1 < acc.1 { cur } else { acc },
                    );
            attach[j + 1] = best;
            cost.set(0, j + 1, c);
            for (j2, &w) in rest.iter().enumerate().skip(j + 1) {
                cost.set(j + 1, j2 + 1, inst.cost.get(v, w));
            }
        }
        let mut penalty = vec![Penalty::Infinite; m];
        for (j, &v) in rest.iter().enumerate() {
            penalty[j + 1] = inst.effective_penalty(v);
        }
        ContractedInstance {
            cost,
            penalty,
            original,
            attach,
        }
    }

    pub fn n(&self) -> usize {
        self.cost.n()
    }

    /// Maps a contracted edge back to original endpoints; the root end goes
    /// to the attachment vertex of the other end.
    pub fn lift_edge(&self, u: usize, v: usize) -> (usize, usize) {
        match (u, v) {
            (0, w) | (w, 0) => (self.attach[w], self.original[w]),
            (a, b) => (self.original[a], self.original[b]),
        }
    }
}

/// Solves the relaxation of `inst` in the given variant. For
/// [`LpVariant::PctspContracted`] all terminals are merged into the root.
pub fn solve_lp(inst: &MetricInstance, variant: LpVariant, mode: LpMode) -> Result<StrollLpSolution> {
    let spec = match variant {
        LpVariant::Ordered | LpVariant::Pairs => {
            let want_ordered = variant == LpVariant::Ordered;
            if inst.terminals.is_ordered() != want_ordered {
                return Err(Error::InvalidArgument(format!(
                    "variant {variant:?} does not match the instance terminals"
                )));
            }
            stroll_spec(inst)
        }
        LpVariant::PctspContracted => {
            let c = ContractedInstance::new(inst, &inst.terminals.vertices());
            return solve_contracted(&c, mode);
        }
    };
    solve_spec(spec, variant, mode, &inst.terminals.vertices())
}

/// Rooted relaxation on a contracted instance.
pub fn solve_contracted(c: &ContractedInstance, mode: LpMode) -> Result<StrollLpSolution> {
    let n = c.n();
    let spec = ModelSpec {
        cost: c.cost.clone(),
        penalty: c.penalty.clone(),
        comps: vec![(0, 0)],
        zero: vec![vec![false; n]],
        fixed: vec![None; n],
    };
    solve_spec(spec, LpVariant::PctspContracted, mode, &[0])
}

fn stroll_spec(inst: &MetricInstance) -> ModelSpec {
    let n = inst.n;
    let comps = inst.terminals.components();
    let terminals = inst.terminals.vertices();
    let zero = comps
        .iter()
        .map(|&(s, t)| {
            let mut z = vec![false; n];
            for &o in &terminals {
                if o != s && o != t {
                    z[o] = true;
                }
            }
            z
        })
        .collect();
    ModelSpec {
        cost: inst.cost.clone(),
        penalty: (0..n).map(|v| inst.effective_penalty(v)).collect(),
        comps,
        zero,
        fixed: vec![None; n],
    }
}

fn solve_spec(spec: ModelSpec, variant: LpVariant, mode: LpMode, terminals: &[usize]) -> Result<StrollLpSolution> {
    let n = spec.n();
    let k = spec.comps.len();
    let (raw, rounds, cuts) = match mode {
        LpMode::Enumerated => {
            if n > ENUMERATED_MAX_N {
                return Err(Error::SizeCap {
                    what: "enumerated-lp",
                    actual: n,
                    cap: ENUMERATED_MAX_N,
                });
            }
            let rows = enumerate_cuts(&spec);
            let raw = solve_model(&spec, &rows, 1)?;
            (raw, 1, rows.len())
        }
        LpMode::CuttingPlane => {
            let max_rounds = 50 * n.max(1) * k.max(1);
            let mut rows: Vec<CutRow> = Vec::new();
            let mut rounds = 0;
            loop {
                rounds += 1;
                if rounds > max_rounds {
                    return Err(Error::Lp {
                        message: format!("cutting-plane loop exceeded {max_rounds} rounds"),
                        rounds,
                    });
                }
                let raw = solve_model(&spec, &rows, rounds)?;
                let mut added = 0;
                for i in 0..k {
                    let (s, t) = spec.comps[i];
                    for cut in separate_all(&raw.x[i], &raw.y[i], s, t).into_iter().take(n + 1) {
                        let row = cut.to_row(i, n);
                        if !rows.contains(&row) {
                            rows.push(row);
                            added += 1;
                        }
                    }
                }
                if added == 0 {
                    break (raw, rounds, rows.len());
                }
            }
        }
    };
    Ok(assemble(spec, raw, variant, mode, rounds, cuts, terminals))
}

fn assemble(
    spec: ModelSpec,
    raw: RawSolution,
    variant: LpVariant,
    mode: LpMode,
    rounds: usize,
    cuts: usize,
    terminals: &[usize],
) -> StrollLpSolution {
    let n = spec.n();
    let mut x_total = SymMatrix::zeros(n);
    let mut y_total = vec![0.0; n];
    for (xi, yi) in raw.x.iter().zip(&raw.y) {
        for (u, v, w) in xi.edges() {
            x_total.add(u, v, w);
        }
        for v in 0..n {
            y_total[v] += yi[v];
        }
    }
    for &o in terminals {
        y_total[o] = 1.0;
    }
    for y in &mut y_total {
        *y = y.clamp(0.0, 1.0);
    }
    let connection_cost = x_total.dot(&spec.cost);
    let penalty_cost = (0..n)
        .filter(|v| !terminals.contains(v))
        .map(|v| match spec.penalty[v] {
            Penalty::Finite(p) => p * (1.0 - y_total[v]),
            Penalty::Infinite => 0.0,
        })
        .sum();
    StrollLpSolution {
        variant,
        mode,
        components: spec.comps.clone(),
        x: raw.x,
        y: raw.y,
        x_total,
        y_total,
        connection_cost,
        penalty_cost,
        objective: connection_cost + penalty_cost,
        rounds,
        cuts,
        spec,
    }
}

/// All cut rows of the relaxation. Vertices pinned to zero in a component
/// carry no edges there, so subsets are taken over the remaining vertices
/// only; singleton vertex cuts follow from the degree equalities.
fn enumerate_cuts(spec: &ModelSpec) -> Vec<CutRow> {
    let n = spec.n();
    let mut rows = Vec::new();
    for (i, &(s, t)) in spec.comps.iter().enumerate() {
        let free: Vec<usize> = (0..n).filter(|&v| v != s && v != t && !spec.zero[i][v]).collect();
        let m = free.len();
        for mask in 0u64..(1u64 << m) {
            let mut side = vec![false; n];
            for (j, &v) in free.iter().enumerate() {
                side[v] = mask >> j & 1 == 1;
            }
            if s != t {
                let mut st_side = side.clone();
                st_side[s] = true;
                rows.push(CutRow {
                    comp: i,
                    side: st_side,
                    rhs: CutRhs::One,
                });
            }
            if mask.count_ones() >= 2 {
                for (j, &v) in free.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        rows.push(CutRow {
                            comp: i,
                            side: side.clone(),
                            rhs: CutRhs::TwoY(v),
                        });
                    }
                }
            }
        }
    }
    rows
}

/// Re-solves with `y_{i,v} = 0` for every `v` in `split` and every other
/// aggregate `y_v` pinned to its current value. Fails with an assertion
/// error if the connection cost rises by more than `1e-6`.
pub fn split_off(sol: &StrollLpSolution, split: &[usize]) -> Result<StrollLpSolution> {
    if split.is_empty() {
        return Ok(sol.clone());
    }
    let n = sol.n();
    let endpoints: Vec<usize> = sol.components.iter().flat_map(|&(s, t)| [s, t]).collect();
    if let Some(&o) = split.iter().find(|v| endpoints.contains(v)) {
        return Err(Error::InvalidArgument(format!("cannot split off terminal {o}")));
    }
    let mut spec = sol.spec.clone();
    let mut in_split = vec![false; n];
    for &v in split {
        in_split[v] = true;
        for z in &mut spec.zero {
            z[v] = true;
        }
        spec.fixed[v] = Some(0.0);
    }
    for v in 0..n {
        if !in_split[v] && !endpoints.contains(&v) {
            let current: f64 = sol.y.iter().map(|yi| yi[v]).sum();
            spec.fixed[v] = Some(current.clamp(0.0, 1.0));
        }
    }
    let terminals: Vec<usize> = (0..n).filter(|&v| endpoints.contains(&v)).collect();
    let mut result = solve_spec(spec, sol.variant, sol.mode, &terminals)?;
    if result.connection_cost > sol.connection_cost + 1e-6 {
        return Err(Error::Assertion(format!(
            "splitting off raised the connection cost from {} to {}",
            sol.connection_cost, result.connection_cost
        )));
    }
    // keep the original pins so later split-offs start from the same model
    result.spec.fixed = sol.spec.fixed.clone();
    for &v in split {
        result.spec.fixed[v] = Some(0.0);
        for z in &mut result.spec.zero {
            z[v] = true;
        }
    }
    Ok(result)
}

/// Every violated invariant of an LP point: pinned endpoint values, degree
/// equalities, both cut families (exhaustively for `n <= 12`, by separation
/// otherwise) and the bounds on the aggregate `y`.
pub fn check_invariants(sol: &StrollLpSolution) -> Vec<String> {
    let n = sol.n();
    let mut errs = Vec::new();
    for (i, &(s, t)) in sol.components.iter().enumerate() {
        let (x, y) = (&sol.x[i], &sol.y[i]);
        if s == t {
            if (y[s] - 1.0).abs() > 1e-9 {
                errs.push(format!("component {i}: root y = {}", y[s]));
            }
        } else if (y[s] - 0.5).abs() > 1e-9 || (y[t] - 0.5).abs() > 1e-9 {
            errs.push(format!("component {i}: endpoint y not 1/2"));
        }
        for v in 0..n {
            if s == t && v == s {
                continue;
            }
            let d = x.degree(v);
            if (d - 2.0 * y[v]).abs() > 1e-7 {
                errs.push(format!("component {i}: degree of {v} is {d}, 2y = {}", 2.0 * y[v]));
            }
        }
        if n <= ENUMERATED_MAX_N {
            for mask in 0u32..(1 << n) {
                let side: Vec<bool> = (0..n).map(|v| mask >> v & 1 == 1).collect();
                let w = x.cut_weight(&side);
                if s != t && side[s] && !side[t] && w < 1.0 - 1e-6 {
                    errs.push(format!("component {i}: s-t cut {mask:#b} has weight {w}"));
                }
                if !side[s] && !side[t] {
                    for v in (0..n).filter(|&v| side[v]) {
                        if w < 2.0 * y[v] - 1e-6 {
                            errs.push(format!("component {i}: cut {mask:#b} weight {w} < 2y_{v}"));
                        }
                    }
                }
            }
        } else if let Some(cut) = separate(x, y, s, t) {
            if cut.violation > 1e-6 {
                errs.push(format!("component {i}: violated cut {:?}", cut.side));
            }
        }
    }
    for v in 0..n {
        let raw: f64 = sol.y.iter().map(|yi| yi[v]).sum();
        if raw < -1e-7 || raw > 1.0 + 1e-7 {
            errs.push(format!("aggregate y_{v} = {raw} outside [0, 1]"));
        }
    }
    for &(s, t) in &sol.components {
        for o in [s, t] {
            if sol.y_total[o] != 1.0 {
                errs.push(format!("terminal {o} has y = {}", sol.y_total[o]));
            }
        }
    }
    errs
}

/// The LP terminals as seen by the pipelines.
pub fn lp_variant_for(terminals: &Terminals) -> LpVariant {
    if terminals.is_ordered() {
        LpVariant::Ordered
    } else {
        LpVariant::Pairs
    }
}
