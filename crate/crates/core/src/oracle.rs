//! Exact solvers for small instances, used to measure approximation ratios
//! and to cross-check the heuristic pieces. Costs are scaled to integers
//! (`1e9` per unit) so that comparisons are exact.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::SymMatrix;
use crate::instance::{MetricInstance, Penalty, Route, Solution, Terminals};

pub const EXACT_PCOTSP_MAX_N: usize = 10;
pub const EXACT_MULTIPATH_MAX_N: usize = 8;
pub const BRUTE_TJOIN_MAX: usize = 8;
pub const JOIN_DOMINANT_MAX_N: usize = 12;

const SCALE: f64 = 1e9;
const INF: i64 = i64::MAX / 4;

fn scaled(x: f64) -> i64 {
    (x * SCALE).round() as i64
}

fn scaled_penalty(p: Penalty) -> i64 {
    match p {
        Penalty::Finite(v) => scaled(v),
        Penalty::Infinite => INF,
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExactResult {
    pub solution: Solution,
    pub objective: f64,
}

/// Subset DP shared by both exact solvers. The route runs through segments
/// in order; segment `j` goes from `starts[j]` to `ends[j]`, and non-terminal
/// vertices may be inserted anywhere or skipped at their penalty.
struct RouteDp<'a> {
    cost: Vec<Vec<i64>>,
    penalty: Vec<i64>,
    free: Vec<usize>,
    starts: &'a [usize],
    ends: &'a [usize],
}

impl RouteDp<'_> {
    /// Best route as one vertex list per segment (start included, end
    /// included).
    fn solve(&self) -> Option<Vec<Vec<usize>>> {
        let m = self.free.len();
        let k = self.starts.len();
        let full = 1usize << m;
        // node index: m free vertices then the segment start (index m)
        let nodes = m + 1;
        let at = |seg: usize, slot: usize| if slot == m { self.starts[seg] } else { self.free[slot] };
        let idx = |seg: usize, mask: usize, slot: usize| (seg * full + mask) * nodes + slot;
        let mut dp = vec![INF; k * full * nodes];
        let mut parent = vec![usize::MAX; k * full * nodes];
        dp[idx(0, 0, m)] = 0;
        for seg in 0..k {
            for mask in 0..full {
                for slot in 0..nodes {
                    let cur = dp[idx(seg, mask, slot)];
                    if cur >= INF {
                        continue;
                    }
                    let v = at(seg, slot);
                    for u in 0..m {
                        if mask >> u & 1 == 1 {
                            continue;
                        }
                        let to = idx(seg, mask | 1 << u, u);
                        let c = cur + self.cost[v][self.free[u]];
                        if c < dp[to] {
                            dp[to] = c;
                            parent[to] = idx(seg, mask, slot);
                        }
                    }
                    if seg + 1 < k {
                        let to = idx(seg + 1, mask, m);
                        let c = cur + self.cost[v][self.ends[seg]];
                        if c < dp[to] {
                            dp[to] = c;
                            parent[to] = idx(seg, mask, slot);
                        }
                    }
                }
            }
        }
        let mut best = (INF, usize::MAX);
        for mask in 0..full {
            let missed = (0..m)
                .filter(|u| mask >> u & 1 == 0)
                .fold(0i64, |acc, u| acc.saturating_add(self.penalty[self.free[u]]));
            if missed >= INF {
                continue;
            }
            for slot in 0..nodes {
                let cur = dp[idx(k - 1, mask, slot)];
                if cur >= INF {
                    continue;
                }
                let total = cur + self.cost[at(k - 1, slot)][self.ends[k - 1]] + missed;
                if total < best.0 {
                    best = (total, idx(k - 1, mask, slot));
                }
            }
        }
        if best.0 >= INF {
            return None;
        }
        let mut segs = vec![Vec::new(); k];
        let mut node = best.1;
        loop {
            let slot = node % nodes;
            let seg = node / nodes / full;
            segs[seg].push(at(seg, slot));
            if parent[node] == usize::MAX {
                break;
            }
            node = parent[node];
        }
        for (seg, s) in segs.iter_mut().enumerate() {
            s.reverse();
            s.push(self.ends[seg]);
        }
        Some(segs)
    }
}

fn dp_for<'a>(inst: &MetricInstance, starts: &'a [usize], ends: &'a [usize]) -> RouteDp<'a> {
    let is_terminal = inst.is_terminal_mask();
    RouteDp {
        cost: (0..inst.n)
            .map(|u| (0..inst.n).map(|v| scaled(inst.cost.get(u, v))).collect())
            .collect(),
        penalty: (0..inst.n).map(|v| scaled_penalty(inst.effective_penalty(v))).collect(),
        free: (0..inst.n).filter(|&v| !is_terminal[v]).collect(),
        starts,
        ends,
    }
}

/// Optimal ordered tour by dynamic programming over subsets (`n <= 10`).
pub fn exact_pcotsp(inst: &MetricInstance) -> Result<ExactResult> {
    let Terminals::Ordered(order) = &inst.terminals else {
        return Err(Error::InvalidArgument("expected ordered terminals".into()));
    };
    if inst.n > EXACT_PCOTSP_MAX_N {
        return Err(Error::SizeCap {
            what: "exact",
            actual: inst.n,
            cap: EXACT_PCOTSP_MAX_N,
        });
    }
    let k = order.len();
    let ends: Vec<usize> = (0..k).map(|j| order[(j + 1) % k]).collect();
    let segs = dp_for(inst, order, &ends)
        .solve()
        .ok_or_else(|| Error::InvalidInstance("no feasible tour".into()))?;
    let tour: Vec<usize> = segs.iter().flat_map(|s| s[..s.len() - 1].iter().copied()).collect();
    let solution = Solution::evaluate(inst, Route::OrderedTour { tour });
    Ok(ExactResult {
        objective: solution.objective,
        solution,
    })
}

/// Optimal vertex-disjoint path collection (`n <= 8`).
pub fn exact_multipath(inst: &MetricInstance) -> Result<ExactResult> {
    let Terminals::Pairs(pairs) = &inst.terminals else {
        return Err(Error::InvalidArgument("expected terminal pairs".into()));
    };
    if inst.n > EXACT_MULTIPATH_MAX_N {
        return Err(Error::SizeCap {
            what: "exact",
            actual: inst.n,
            cap: EXACT_MULTIPATH_MAX_N,
        });
    }
    let starts: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let ends: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    // leaving t_i for s_{i+1} costs nothing
    let dp = dp_for(inst, &starts, &ends);
    let segs = dp
        .solve()
        .ok_or_else(|| Error::InvalidInstance("no feasible paths".into()))?;
    let solution = Solution::evaluate(inst, Route::PathCollection { paths: segs });
    Ok(ExactResult {
        objective: solution.objective,
        solution,
    })
}

/// Cheapest perfect matching on `t` by enumerating every matching
/// (`|t| <= 8`); equals the cheapest T-join of a metric.
pub fn brute_tjoin(cost: &SymMatrix, t: &[usize]) -> Result<f64> {
    if t.len() % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "T-join set has odd cardinality {}",
            t.len()
        )));
    }
    if t.len() > BRUTE_TJOIN_MAX {
        return Err(Error::SizeCap {
            what: "join",
            actual: t.len(),
            cap: BRUTE_TJOIN_MAX,
        });
    }
    fn go(cost: &SymMatrix, rest: &mut Vec<usize>) -> f64 {
        if rest.is_empty() {
            return 0.0;
        }
        let a = rest.remove(0);
        let mut best = f64::INFINITY;
        for i in 0..rest.len() {
            let b = rest.remove(i);
            best = best.min(cost.get(a, b) + go(cost, rest));
            rest.insert(i, b);
        }
        rest.insert(0, a);
        best
    }
    Ok(go(cost, &mut t.to_vec()))
}

/// Smallest `z(delta(S))` over all `T`-odd sets `S`, with a witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CutCheck {
    pub min_cut: f64,
    pub witness: Vec<usize>,
    pub sets_checked: usize,
}

impl CutCheck {
    /// Whether `z` dominates the T-join polytope (every odd cut `>= 1`).
    pub fn dominant(&self) -> bool {
        self.min_cut >= 1.0 - 1e-9
    }
}

/// Enumerates every `S` with `|S ∩ T|` odd (`n <= 12`).
pub fn verify_join_dominant(z: &SymMatrix, t: &[usize]) -> Result<CutCheck> {
    let n = z.n();
    if n > JOIN_DOMINANT_MAX_N {
        return Err(Error::SizeCap {
            what: "join-dominant-check",
            actual: n,
            cap: JOIN_DOMINANT_MAX_N,
        });
    }
    let mut best = CutCheck {
        min_cut: f64::INFINITY,
        witness: Vec::new(),
        sets_checked: 0,
    };
    if n == 0 {
        return Ok(best);
    }
    let mut t_mask = 0u32;
    for &v in t {
        t_mask ^= 1 << v;
    }
    // S and its complement have the same cut; keep vertex n-1 outside
    for mask in 1u32..(1 << (n - 1)) {
        if (mask & t_mask).count_ones() % 2 == 0 {
            continue;
        }
        best.sets_checked += 1;
        let mut w = 0.0;
        for u in (0..n).filter(|&u| mask >> u & 1 == 1) {
            for v in (0..n).filter(|&v| mask >> v & 1 == 0) {
                w += z.get(u, v);
            }
        }
        if w < best.min_cut {
            best.min_cut = w;
            best.witness = (0..n).filter(|&u| mask >> u & 1 == 1).collect();
        }
    }
    Ok(best)
}
