//! Prize-collecting multi-path TSP: two randomized algorithms over the
//! pairs relaxation and the contracted relaxation, and their combination.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::decomp::{decompose, tree_path, tree_vertices, TreeDistribution};
use crate::error::{Error, Result};
use crate::graph::{euler_trail, Dsu, MultiGraph};
use crate::instance::{MetricInstance, Route, Solution, Terminals};
use crate::lp::{solve_contracted, solve_lp, ContractedInstance, LpMode, LpVariant, StrollLpSolution};
use crate::pcotsp::{pickup, Caps, ThresholdDist};
use crate::report::{ratio, SolutionReport, StageCosts, Thresholds, TrialStats};
use crate::rng::stream;

pub const DEFAULT_SIGMA0_PRIME: f64 = 0.892769;

const STAGE_A_TREES: u64 = 3;
const STAGE_A_SIGMA: u64 = 4;
const STAGE_B_TREE: u64 = 5;

/// The two branches of the combined guarantee at `s`: tour cost
/// `2 + e^{-s}` and penalty `(e^{-s} / (1 - s) + 1) / 2`.
pub fn multipath_branches(s: f64) -> (f64, f64) {
    let e = (-s).exp();
    (2.0 + e, 0.5 * (e / (1.0 - s) + 1.0))
}

pub fn multipath_bound(s: f64) -> f64 {
    let (a, b) = multipath_branches(s);
    a.max(b)
}

/// Minimizes [`multipath_bound`] on `(0, 1)` by golden-section search.
pub fn optimize_sigma0_prime() -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, 1.0 - 1e-9);
    while hi - lo > 1e-9 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if multipath_bound(a) < multipath_bound(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Debug)]
pub struct MultipathParams {
    pub sigma0_prime: f64,
    pub seed: u64,
    pub trials: usize,
    pub caps: Caps,
    pub lp_mode: LpMode,
}

impl Default for MultipathParams {
    fn default() -> Self {
        MultipathParams {
            sigma0_prime: DEFAULT_SIGMA0_PRIME,
            seed: 0,
            trials: 1,
            caps: Caps::default(),
            lp_mode: LpMode::CuttingPlane,
        }
    }
}

impl MultipathParams {
    pub fn new(sigma0_prime: f64) -> Result<Self> {
        if !(sigma0_prime > 0.0 && sigma0_prime < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma0' must lie in (0, 1), got {sigma0_prime}"
            )));
        }
        Ok(MultipathParams {
            sigma0_prime,
            ..Default::default()
        })
    }

    /// `rho = e^{-sigma0'} / (1 - sigma0')`.
    pub fn rho(&self) -> f64 {
        (-self.sigma0_prime).exp() / (1.0 - self.sigma0_prime)
    }

    pub fn sigma_dist(&self) -> ThresholdDist {
        ThresholdDist::sigma(self.rho(), self.sigma0_prime)
    }
}

/// Per-instance work for both algorithms.
#[derive(Clone, Debug)]
pub struct MultipathPrepared {
    pub inst: MetricInstance,
    pub params: MultipathParams,
    pub pairs: Vec<(usize, usize)>,
    pub lp: StrollLpSolution,
    pub dists: Vec<TreeDistribution>,
    pub contracted: ContractedInstance,
    pub lp_b: StrollLpSolution,
    pub dist_b: TreeDistribution,
    /// `sum_i c(s_i, t_i)`.
    pub delta: f64,
    /// `delta / c(x*)`.
    pub eta: f64,
}

pub fn prepare_multipath(inst: &MetricInstance, params: &MultipathParams) -> Result<MultipathPrepared> {
    crate::pcotsp::check_instance(inst)?;
    let Terminals::Pairs(pairs) = &inst.terminals else {
        return Err(Error::InvalidArgument("expected terminal pairs".into()));
    };
    let lp = solve_lp(inst, LpVariant::Pairs, params.lp_mode)?;
    let dists = lp
        .components
        .iter()
        .enumerate()
        .map(|(i, &(s, t))| decompose(&lp.x[i], &lp.y[i], s, t, &inst.cost, params.caps.decomp))
        .collect::<Result<Vec<_>>>()?;
    let contracted = ContractedInstance::new(inst, &inst.terminals.vertices());
    let lp_b = solve_contracted(&contracted, params.lp_mode)?;
    let dist_b = decompose(&lp_b.x[0], &lp_b.y[0], 0, 0, &contracted.cost, params.caps.decomp)?;
    let delta: f64 = pairs.iter().map(|&(s, t)| inst.cost.get(s, t)).sum();
    let eta = if lp.connection_cost > 1e-12 {
        delta / lp.connection_cost
    } else {
        0.0
    };
    Ok(MultipathPrepared {
        inst: inst.clone(),
        params: params.clone(),
        pairs: pairs.clone(),
        lp,
        dists,
        contracted,
        lp_b,
        dist_b,
        delta,
        eta,
    })
}

/// Walks `g` from `s` to `t` and keeps `s`, `t` and every non-terminal not
/// yet claimed by an earlier path.
fn path_from(g: &MultiGraph, s: usize, t: usize, claimed: &mut [bool], is_terminal: &[bool]) -> Result<Vec<usize>> {
    let walk = if g.edges.is_empty() {
        vec![s]
    } else {
        euler_trail(g, s, t)?
    };
    let mut path = vec![s];
    for &v in &walk[1..] {
        if !is_terminal[v] && !claimed[v] {
            claimed[v] = true;
            path.push(v);
        }
    }
    if t != s {
        path.push(t);
    }
    Ok(path)
}

fn finish(
    prep: &MultipathPrepared,
    algorithm: &'static str,
    trial: usize,
    paths: Vec<Vec<usize>>,
    thresholds: Thresholds,
    stage_costs: StageCosts,
    start: Instant,
) -> SolutionReport {
    let solution = Solution::evaluate(&prep.inst, Route::PathCollection { paths });
    SolutionReport {
        algorithm,
        seed: prep.params.seed,
        trial,
        objective: solution.objective,
        lp_value: prep.lp.objective,
        ratio_vs_lp: ratio(solution.objective, prep.lp.objective),
        thresholds,
        stage_costs,
        join_within_z: None,
        resampled: 0,
        wall_time_ms: start.elapsed().as_millis() as u64,
        solution,
    }
}

/// Samples one tree per pair, picks up vertices with `y_v >= sigma`, and
/// doubles everything off the `s_i`-`t_i` tree paths.
pub fn run_algorithm_a(prep: &MultipathPrepared, trial: usize) -> Result<SolutionReport> {
    let start = Instant::now();
    let inst = &prep.inst;
    let n = inst.n;
    let seed = prep.params.seed;
    let mut rng = stream(seed, trial as u64, STAGE_A_TREES);
    let trees: Vec<Vec<(usize, usize)>> = prep.dists.iter().map(|d| d.sample_tree(&mut rng).to_vec()).collect();
    let sigma = prep
        .params
        .sigma_dist()
        .sample(&mut stream(seed, trial as u64, STAGE_A_SIGMA));

    // owner[v]: smallest pair whose tree contains v
    let mut owner = vec![usize::MAX; n];
    for (i, (t, &(s, e))) in trees.iter().zip(&prep.pairs).enumerate().rev() {
        for v in tree_vertices(t, s, e, n) {
            owner[v] = i;
        }
    }
    let in_tree: Vec<bool> = owner.iter().map(|&o| o != usize::MAX).collect();
    let forest = pickup(&prep.lp.y_total, &in_tree, sigma, &inst.cost)?;
    let mut dsu = Dsu::new(n);
    for &(u, v) in &forest {
        dsu.union(u, v);
    }
    let mut comp_owner = vec![usize::MAX; n];
    for v in 0..n {
        if in_tree[v] {
            let r = dsu.find(v);
            comp_owner[r] = comp_owner[r].min(owner[v]);
        }
    }

    let k = prep.pairs.len();
    let mut graphs: Vec<MultiGraph> = vec![MultiGraph::new(n); k];
    let mut backbone = 0.0;
    for (i, (t, &(s, e))) in trees.iter().zip(&prep.pairs).enumerate() {
        let path = tree_path(t, s, e, n).ok_or_else(|| Error::Assertion(format!("tree {i} misses its pair")))?;
        let on_path: Vec<(usize, usize)> = path.windows(2).map(|w| (w[0].min(w[1]), w[0].max(w[1]))).collect();
        for &(u, v) in t {
            let copies = if on_path.contains(&(u.min(v), u.max(v))) { 1 } else { 2 };
            for _ in 0..copies {
                graphs[i].add_edge_costed(u, v, &inst.cost);
            }
        }
        backbone += path.windows(2).map(|w| inst.cost.get(w[0], w[1])).sum::<f64>();
    }
    for &(u, v) in &forest {
        let i = comp_owner[dsu.find(u)];
        graphs[i].add_edge_costed(u, v, &inst.cost);
        graphs[i].add_edge_costed(u, v, &inst.cost);
    }

    let is_terminal = inst.is_terminal_mask();
    let mut claimed = vec![false; n];
    let paths = graphs
        .iter()
        .zip(&prep.pairs)
        .map(|(g, &(s, t))| path_from(g, s, t, &mut claimed, &is_terminal))
        .collect::<Result<Vec<_>>>()?;
    let edge_sum = |es: &[(usize, usize)]| es.iter().map(|&(u, v)| inst.cost.get(u, v)).sum::<f64>();
    let stage_costs = StageCosts {
        cycle: backbone,
        trees: trees.iter().map(|t| edge_sum(t)).sum(),
        pickup: Some(edge_sum(&forest)),
        multigraph: Some(graphs.iter().map(|g| g.cost()).sum()),
        ..Default::default()
    };
    Ok(finish(
        prep,
        "multipath-a",
        trial,
        paths,
        Thresholds {
            gamma: None,
            sigma: Some(sigma),
        },
        stage_costs,
        start,
    ))
}

/// Samples one tree of the relaxation with all terminals merged, doubles
/// it, and adds the direct edges `{s_i, t_i}`. Each subtree hanging off the
/// merged root joins the path of the terminal it attaches to.
pub fn run_algorithm_b(prep: &MultipathPrepared, trial: usize) -> Result<SolutionReport> {
    let start = Instant::now();
    let inst = &prep.inst;
    let n = inst.n;
    let c = &prep.contracted;
    let tree = prep
        .dist_b
        .sample_tree(&mut stream(prep.params.seed, trial as u64, STAGE_B_TREE));

    let mut pair_of = vec![usize::MAX; n];
    for (i, &(s, t)) in prep.pairs.iter().enumerate() {
        pair_of[s] = i;
        pair_of[t] = i;
    }
    // subtrees of the contracted tree below the root, each owned by the pair
    // of the terminal its root edge lifts to
    let m = c.n();
    let mut dsu = Dsu::new(m);
    for &(u, v) in tree {
        if u != 0 && v != 0 {
            dsu.union(u, v);
        }
    }
    let mut sub_owner = vec![usize::MAX; m];
    for &(u, v) in tree {
        if u == 0 || v == 0 {
            let w = u + v;
            sub_owner[dsu.find(w)] = pair_of[c.attach[w]];
        }
    }

    let mut graphs: Vec<MultiGraph> = vec![MultiGraph::new(n); prep.pairs.len()];
    for (i, &(s, t)) in prep.pairs.iter().enumerate() {
        graphs[i].add_edge_costed(s, t, &inst.cost);
    }
    let mut tree_cost = 0.0;
    for &(u, v) in tree {
        let w = if u == 0 { v } else { u };
        let i = sub_owner[dsu.find(w)];
        let (a, b) = c.lift_edge(u, v);
        tree_cost += inst.cost.get(a, b);
        graphs[i].add_edge_costed(a, b, &inst.cost);
        graphs[i].add_edge_costed(a, b, &inst.cost);
    }

    let is_terminal = inst.is_terminal_mask();
    let mut claimed = vec![false; n];
    let paths = graphs
        .iter()
        .zip(&prep.pairs)
        .map(|(g, &(s, t))| path_from(g, s, t, &mut claimed, &is_terminal))
        .collect::<Result<Vec<_>>>()?;
    let stage_costs = StageCosts {
        cycle: prep.delta,
        trees: tree_cost,
        multigraph: Some(prep.delta + 2.0 * tree_cost),
        ..Default::default()
    };
    Ok(finish(
        prep,
        "multipath-b",
        trial,
        paths,
        Thresholds::default(),
        stage_costs,
        start,
    ))
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MultipathReport {
    pub best: SolutionReport,
    pub lp_value: f64,
    pub trials: usize,
    pub algorithm_a: TrialStats,
    pub algorithm_b: TrialStats,
    /// Mean objective of returning either algorithm with probability 1/2.
    pub coin_flip_mean: f64,
    pub sigma0_prime: f64,
    pub rho: f64,
    pub delta: f64,
    pub eta: f64,
    /// `max{2 + e^{-sigma0'}, (rho + 1) / 2}`.
    pub bound: f64,
}

/// Runs both algorithms for every trial and keeps the cheapest paths.
pub fn solve_multipath(inst: &MetricInstance, params: &MultipathParams) -> Result<MultipathReport> {
    let prep = prepare_multipath(inst, params)?;
    let trials = params.trials.max(1);
    let rounds: Vec<(SolutionReport, SolutionReport)> = (0..trials)
        .into_par_iter()
        .map(|t| Ok((run_algorithm_a(&prep, t)?, run_algorithm_b(&prep, t)?)))
        .collect::<Result<Vec<_>>>()?;
    let best = rounds
        .iter()
        .flat_map(|(a, b)| [a, b])
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .expect("at least one trial")
        .clone();
    let a: Vec<f64> = rounds.iter().map(|r| r.0.objective).collect();
    let b: Vec<f64> = rounds.iter().map(|r| r.1.objective).collect();
    let (sa, sb) = (TrialStats::of(&a), TrialStats::of(&b));
    Ok(MultipathReport {
        best,
        lp_value: prep.lp.objective,
        trials,
        coin_flip_mean: 0.5 * (sa.mean + sb.mean),
        algorithm_a: sa,
        algorithm_b: sb,
        sigma0_prime: params.sigma0_prime,
        rho: params.rho(),
        delta: prep.delta,
        eta: prep.eta,
        bound: multipath_bound(params.sigma0_prime),
    })
}
