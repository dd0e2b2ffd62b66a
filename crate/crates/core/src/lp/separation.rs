use serde::Serialize;

use super::model::{CutRhs, CutRow};
use crate::graph::{min_cut, SymMatrix};

/// Violations smaller than this are treated as satisfied.
pub const SEPARATION_TOL: f64 = 1e-7;

/// A violated cut constraint of the stroll (or rooted) relaxation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViolatedCut {
    /// Sorted vertex set `S`.
    pub side: Vec<usize>,
    /// `None` for `x(delta(S)) >= 1`, `Some(v)` for `x(delta(S)) >= 2 y_v`.
    pub vertex: Option<usize>,
    pub capacity: f64,
    pub violation: f64,
}

/// Every violated cut found by the min-cut oracle: one for the `s`-`t`
/// constraint and one per vertex `v` for `x(delta(S)) >= 2 y_v`, sorted by
/// decreasing violation. A rooted component is given as `s == t`.
pub fn separate_all(x: &SymMatrix, y: &[f64], s: usize, t: usize) -> Vec<ViolatedCut> {
    let n = x.n();
    let mut out = Vec::new();
    if s != t {
        let cut = min_cut(x, &[s], &[t]).expect("distinct endpoints");
        if cut.capacity < 1.0 - SEPARATION_TOL {
            out.push(ViolatedCut {
                violation: 1.0 - cut.capacity,
                capacity: cut.capacity,
                side: cut.side,
                vertex: None,
            });
        }
    }
    let sinks: Vec<usize> = if s == t { vec![s] } else { vec![s, t] };
    for v in 0..n {
        if v == s || v == t || y[v] <= SEPARATION_TOL {
            continue;
        }
        let cut = min_cut(x, &[v], &sinks).expect("v is not an endpoint");
        let need = 2.0 * y[v];
        if cut.capacity < need - SEPARATION_TOL {
            out.push(ViolatedCut {
                violation: need - cut.capacity,
                capacity: cut.capacity,
                side: cut.side,
                vertex: Some(v),
            });
        }
    }
    out.sort_by(|a, b| b.violation.total_cmp(&a.violation));
    out
}

/// A most-violated cut, or `None` when every constraint holds to tolerance.
pub fn separate(x: &SymMatrix, y: &[f64], s: usize, t: usize) -> Option<ViolatedCut> {
    separate_all(x, y, s, t).into_iter().next()
}

impl ViolatedCut {
    pub(crate) fn to_row(&self, comp: usize, n: usize) -> CutRow {
        let mut side = vec![false; n];
        for &v in &self.side {
            side[v] = true;
        }
        CutRow {
            comp,
            side,
            rhs: match self.vertex {
                None => CutRhs::One,
                Some(v) => CutRhs::TwoY(v),
            },
        }
    }
}
