use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Variable};

use crate::error::{Error, Result};
use crate::graph::SymMatrix;
use crate::instance::Penalty;

/// A cut constraint on one component: `x_i(delta(S)) >= 1` or
/// `x_i(delta(S)) >= 2 y_{i,v}`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct CutRow {
    pub comp: usize,
    pub side: Vec<bool>,
    pub rhs: CutRhs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum CutRhs {
    One,
    TwoY(usize),
}

/// Everything needed to build the relaxation for one solve.
#[derive(Clone, Debug)]
pub(crate) struct ModelSpec {
    pub cost: SymMatrix,
    /// Effective penalties; terminals carry 0.
    pub penalty: Vec<Penalty>,
    /// Component endpoints; a rooted component has `s == t == r`.
    pub comps: Vec<(usize, usize)>,
    /// `zero[i][v]`: `y_{i,v}` (and every incident `x_i`) pinned to 0.
    pub zero: Vec<Vec<bool>>,
    /// Aggregate pins `sum_i y_{i,v} = value`.
    pub fixed: Vec<Option<f64>>,
}

impl ModelSpec {
    pub fn n(&self) -> usize {
        self.cost.n()
    }

    pub fn rooted(&self, comp: usize) -> bool {
        self.comps[comp].0 == self.comps[comp].1
    }
}

#[derive(Clone, Debug)]
pub(crate) struct RawSolution {
    pub x: Vec<SymMatrix>,
    pub y: Vec<Vec<f64>>,
}

struct Vars {
    x: Vec<Vec<Option<Variable>>>,
    y: Vec<Vec<Option<Variable>>>,
}

/// Builds and solves the relaxation with the given cut rows.
pub(crate) fn solve_model(spec: &ModelSpec, cuts: &[CutRow], rounds: usize) -> Result<RawSolution> {
    let n = spec.n();
    let k = spec.comps.len();
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let mut vars = Vars {
        x: vec![vec![None; n * n]; k],
        y: vec![vec![None; n]; k],
    };
    for i in 0..k {
        let (s, t) = spec.comps[i];
        let zero = &spec.zero[i];
        for v in 0..n {
            if zero[v] {
                continue;
            }
            let bounds = if spec.rooted(i) && v == s {
                (1.0, 1.0)
            } else if v == s || v == t {
                (0.5, 0.5)
            } else {
                (0.0, 1.0)
            };
            let obj = match spec.penalty[v] {
                Penalty::Finite(pi) if v != s && v != t => -pi,
                _ => 0.0,
            };
            vars.y[i][v] = Some(p.add_var(obj, bounds));
        }
        for u in 0..n {
            for v in (u + 1)..n {
                if zero[u] || zero[v] {
                    continue;
                }
                let var = p.add_var(spec.cost.get(u, v), (0.0, f64::INFINITY));
                vars.x[i][u * n + v] = Some(var);
                vars.x[i][v * n + u] = Some(var);
            }
        }
        // degree equalities x_i(delta(v)) = 2 y_{i,v}
        for v in 0..n {
            let Some(yv) = vars.y[i][v] else { continue };
            let mut expr: Vec<(Variable, f64)> =
                (0..n).filter_map(|u| vars.x[i][u * n + v].map(|x| (x, 1.0))).collect();
            if expr.is_empty() {
                if !(spec.rooted(i) && v == s) {
                    p.add_constraint([(yv, 1.0)], ComparisonOp::Eq, 0.0);
                }
                continue;
            }
            // the root stands for a merged set of terminals: its degree is free
            if !(spec.rooted(i) && v == s) {
                expr.push((yv, -2.0));
                p.add_constraint(expr, ComparisonOp::Eq, 0.0);
            }
        }
    }
    for v in 0..n {
        let terms: Vec<(Variable, f64)> = (0..k).filter_map(|i| vars.y[i][v].map(|y| (y, 1.0))).collect();
        let pin = match (spec.fixed[v], spec.penalty[v]) {
            (Some(val), _) => Some(val),
            (None, Penalty::Infinite) => Some(1.0),
            _ => None,
        };
        let is_endpoint = spec.comps.iter().any(|&(s, t)| s == v || t == v);
        if is_endpoint {
            continue;
        }
        match pin {
            Some(val) if terms.is_empty() => {
                if val > 1e-12 {
                    return Err(Error::Lp {
                        message: format!("vertex {v} pinned to y = {val} but excluded from every component"),
                        rounds,
                    });
                }
            }
            Some(val) => p.add_constraint(terms, ComparisonOp::Eq, val),
            None if terms.len() > 1 => p.add_constraint(terms, ComparisonOp::Le, 1.0),
            None => {}
        }
    }
    for cut in cuts {
        let i = cut.comp;
        let mut expr = LinearExpr::empty();
        let mut any = false;
        for u in 0..n {
            if !cut.side[u] {
                continue;
            }
            for v in 0..n {
                if cut.side[v] {
                    continue;
                }
                if let Some(x) = vars.x[i][u * n + v] {
                    expr.add(x, 1.0);
                    any = true;
                }
            }
        }
        match cut.rhs {
            CutRhs::One => {
                if !any {
                    return Err(Error::Lp {
                        message: format!("component {i}: s-t cut has no usable edge"),
                        rounds,
                    });
                }
                p.add_constraint(expr, ComparisonOp::Ge, 1.0);
            }
            CutRhs::TwoY(v) => {
                let Some(yv) = vars.y[i][v] else { continue };
                expr.add(yv, -2.0);
                p.add_constraint(expr, ComparisonOp::Ge, 0.0);
            }
        }
    }

    let sol = p
        .solve()
        .map_err(|e| Error::Lp {
            message: format!("{e:?}"),
            rounds,
        })?
        .into_solution()
        .map_err(|_| Error::Lp {
            message: "solve interrupted".into(),
            rounds,
        })?;

    let mut x = vec![SymMatrix::zeros(n); k];
    let mut y = vec![vec![0.0; n]; k];
    for i in 0..k {
        for u in 0..n {
            if let Some(var) = vars.y[i][u] {
                y[i][u] = clean(sol.var_value_raw(var));
            }
            for v in (u + 1)..n {
                if let Some(var) = vars.x[i][u * n + v] {
                    x[i].set(u, v, clean(sol.var_value_raw(var)));
                }
            }
        }
    }
    Ok(RawSolution { x, y })
}

/// Snaps solver noise around 0 to exactly 0.
fn clean(v: f64) -> f64 {
    if v.abs() < 1e-11 {
        0.0
    } else {
        v
    }
}
