//! Randomized LP rounding for the prize-collecting ordered TSP, plus the
//! simple cycle-and-forest algorithm it is combined with.

mod params;
mod simple;
mod stages;

pub use params::{
    compute_constants, g_value, ks_distance, penalty_ratio, scan_g, tour_factor, Caps, Constants, GScan, Params,
    ThresholdDist, BETA_PC, DEFAULT_ALPHA,
};
pub use simple::{prepare_simple, run_simple, SimplePrepared};
pub use stages::{
    build_layers, build_z, concat_paths, parity_correct, pickup, prune_core, shortcut_ordered, LayerEdge, Layers,
    SampledTree,
};

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::decomp::{decompose, tree_path, tree_vertices, TreeDistribution};
use crate::error::{Error, Result};
use crate::graph::{MultiGraph, SymMatrix, TJoin};
use crate::instance::{validate, MetricInstance, Route, Solution};
use crate::lp::{solve_lp, split_off, LpVariant, StrollLpSolution};
use crate::report::{ratio, PenaltyRatio, SolutionReport, StageCosts, Thresholds, TrialStats};
use crate::rng::stream;

/// Redraws allowed per round when the join exceeds its size cap.
pub const MAX_RESAMPLES: usize = 8;

const STAGE_TREES: u64 = 0;
const STAGE_GAMMA: u64 = 1;
const STAGE_SIGMA: u64 = 2;
/// Stage ids of one attempt occupy a block of this size.
pub(crate) const STAGE_BLOCK: u64 = 16;

/// Per-instance work shared by all rounds: the LP, the split-off LP and a
/// tree distribution per component.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub inst: MetricInstance,
    pub params: Params,
    /// Optimal LP before splitting off low vertices.
    pub lp_star: StrollLpSolution,
    /// LP after splitting off every non-terminal with `y <= theta`.
    pub lp: StrollLpSolution,
    pub split: Vec<usize>,
    pub dists: Vec<TreeDistribution>,
}

pub(crate) fn check_instance(inst: &MetricInstance) -> Result<()> {
    let v = validate(inst);
    if let Some(first) = v.first() {
        return Err(Error::InvalidInstance(format!(
            "{first}{}",
            if v.len() > 1 {
                format!(" (and {} more)", v.len() - 1)
            } else {
                String::new()
            }
        )));
    }
    Ok(())
}

pub fn prepare(inst: &MetricInstance, params: &Params) -> Result<Prepared> {
    check_instance(inst)?;
    if !inst.terminals.is_ordered() {
        return Err(Error::InvalidArgument("expected ordered terminals".into()));
    }
    let lp_star = solve_lp(inst, LpVariant::Ordered, params.lp_mode)?;
    prepare_from(inst, params, lp_star)
}

/// As [`prepare`], starting from a given point of the ordered relaxation of
/// `inst` instead of its optimum.
pub fn prepare_from(inst: &MetricInstance, params: &Params, lp_star: StrollLpSolution) -> Result<Prepared> {
    check_instance(inst)?;
    if lp_star.variant != LpVariant::Ordered || lp_star.n() != inst.n {
        return Err(Error::InvalidArgument(
            "expected an ordered relaxation of the instance".into(),
        ));
    }
    let theta = params.constants.theta;
    let is_terminal = inst.is_terminal_mask();
    let split: Vec<usize> = (0..inst.n)
        .filter(|&v| !is_terminal[v] && lp_star.y_total[v] <= theta)
        .collect();
    let lp = split_off(&lp_star, &split)?;
    let dists = lp
        .components
        .iter()
        .enumerate()
        .map(|(i, &(s, t))| decompose(&lp.x[i], &lp.y[i], s, t, &inst.cost, params.caps.decomp))
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared {
        inst: inst.clone(),
        params: params.clone(),
        lp_star,
        lp,
        split,
        dists,
    })
}

/// Everything produced by one round, for inspection and checks.
#[derive(Clone, Debug, Serialize)]
pub struct PipelineState {
    pub trees: Vec<SampledTree>,
    /// Closed walk through the terminals along the tree paths.
    pub cycle: Vec<usize>,
    pub gamma: f64,
    pub sigma: f64,
    pub pruned: Vec<Vec<(usize, usize)>>,
    pub pickup: Vec<(usize, usize)>,
    pub layers: Layers,
    /// Pruned trees plus pickup forest.
    pub pruned_graph: MultiGraph,
    pub join: TJoin,
    pub z: SymMatrix,
    pub tour: Vec<usize>,
}

impl Prepared {
    pub fn sample_trees(&self, rng: &mut impl rand::Rng) -> Result<Vec<SampledTree>> {
        let n = self.inst.n;
        self.dists
            .iter()
            .map(|d| {
                let edges = d.sample_tree(rng).to_vec();
                let path = tree_path(&edges, d.s, d.t, n)
                    .ok_or_else(|| Error::Assertion(format!("sampled tree misses {} or {}", d.s, d.t)))?;
                Ok(SampledTree {
                    s: d.s,
                    t: d.t,
                    edges,
                    path,
                })
            })
            .collect()
    }

    /// Per-vertex ratios `rho_v` for every vertex with `y*_v < 1`.
    pub fn penalty_ratios(&self) -> Vec<PenaltyRatio> {
        self.lp_star
            .y_total
            .iter()
            .enumerate()
            .filter(|(_, &y)| y < 1.0 - 1e-9)
            .map(|(vertex, &y)| PenaltyRatio {
                vertex,
                y,
                rho: penalty_ratio(y),
            })
            .collect()
    }
}

/// One round of the main algorithm with its intermediate state. `attempt`
/// selects fresh random streams for a redraw of the same trial.
pub fn run_pcotsp_traced(prep: &Prepared, trial: usize, attempt: usize) -> Result<(SolutionReport, PipelineState)> {
    let start = Instant::now();
    let inst = &prep.inst;
    let p = &prep.params;
    let c = p.constants;
    let n = inst.n;
    let y = &prep.lp.y_total;
    let base = attempt as u64 * STAGE_BLOCK;
    let seed = p.seed;

    let trees = prep.sample_trees(&mut stream(seed, trial as u64, base + STAGE_TREES))?;
    let cycle = concat_paths(&trees);
    let gamma = p
        .gamma_dist()
        .sample(&mut stream(seed, trial as u64, base + STAGE_GAMMA));
    let sigma = p
        .sigma_dist()
        .sample(&mut stream(seed, trial as u64, base + STAGE_SIGMA));

    let pruned: Vec<Vec<(usize, usize)>> = trees.iter().map(|t| prune_core(&t.edges, t.s, t.t, y, gamma)).collect();
    let mut in_tree = vec![false; n];
    for t in &trees {
        for v in tree_vertices(&t.edges, t.s, t.t, n) {
            in_tree[v] = true;
        }
    }
    let forest = pickup(y, &in_tree, sigma, &inst.cost)?;

    let mut graph = MultiGraph::new(n);
    for &(u, v) in pruned.iter().flatten().chain(&forest) {
        graph.add_edge_costed(u, v, &inst.cost);
    }
    let layers = build_layers(&trees, y, c.theta, c.sigma0);
    let z = build_z(&prep.lp.x_total, &layers, gamma, sigma, &forest, c.beta);
    let z_cost = z.dot(&inst.cost);
    let join = parity_correct(&graph, &inst.cost, p.caps.join)?;
    let join_within_z = join.cost <= z_cost + 1e-9 * inst.diameter().max(1.0);

    let mut h = graph.clone();
    h.extend(&join.to_multigraph(&inst.cost));
    let tour = shortcut_ordered(&h, &cycle, &inst.is_terminal_mask())?;
    let solution = Solution::evaluate(inst, Route::OrderedTour { tour: tour.clone() });
    if solution.tour_cost > h.cost() + inst.tolerance() * n as f64 {
        return Err(Error::Assertion(format!(
            "shortcut tour costs {} but the multigraph only {}",
            solution.tour_cost,
            h.cost()
        )));
    }

    let sum = |edges: &mut dyn Iterator<Item = &(usize, usize)>| edges.map(|&(u, v)| inst.cost.get(u, v)).sum::<f64>();
    let cycle_cost = (0..cycle.len())
        .map(|i| inst.cost.get(cycle[i], cycle[(i + 1) % cycle.len()]))
        .sum();
    let report = SolutionReport {
        algorithm: "pcotsp",
        seed,
        trial,
        objective: solution.objective,
        lp_value: prep.lp_star.objective,
        ratio_vs_lp: ratio(solution.objective, prep.lp_star.objective),
        thresholds: Thresholds {
            gamma: Some(gamma),
            sigma: Some(sigma),
        },
        stage_costs: StageCosts {
            cycle: cycle_cost,
            trees: sum(&mut trees.iter().flat_map(|t| &t.edges)),
            pruned: Some(sum(&mut pruned.iter().flatten())),
            pickup: Some(sum(&mut forest.iter())),
            join: Some(join.cost),
            z: Some(z_cost),
            multigraph: Some(h.cost()),
        },
        join_within_z: Some(join_within_z),
        resampled: attempt,
        wall_time_ms: start.elapsed().as_millis() as u64,
        solution,
    };
    let state = PipelineState {
        trees,
        cycle,
        gamma,
        sigma,
        pruned,
        pickup: forest,
        layers,
        pruned_graph: graph,
        join,
        z,
        tour,
    };
    Ok((report, state))
}

/// One round, redrawn (up to [`MAX_RESAMPLES`] times) when the join set
/// exceeds its cap.
pub fn run_pcotsp(prep: &Prepared, trial: usize) -> Result<SolutionReport> {
    with_resampling(|attempt| run_pcotsp_traced(prep, trial, attempt).map(|r| r.0))
}

pub(crate) fn with_resampling<T>(mut f: impl FnMut(usize) -> Result<T>) -> Result<T> {
    let mut attempt = 0;
    loop {
        match f(attempt) {
            Err(Error::SizeCap { what: "join", .. }) if attempt + 1 < MAX_RESAMPLES => attempt += 1,
            other => return other,
        }
    }
}

/// Result of [`solve`]: the best round over all trials of both algorithms.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveReport {
    pub best: SolutionReport,
    pub lp_value: f64,
    pub trials: usize,
    pub pcotsp: TrialStats,
    pub simple: TrialStats,
    /// Rounds where the join exceeded `c(z)`.
    pub join_over_z: usize,
    pub split_off: Vec<usize>,
    pub y_cap_tight: Vec<usize>,
    pub penalty_ratios: Vec<PenaltyRatio>,
}

/// Runs both algorithms for `params.trials` independent trials (in
/// parallel, deterministically) and keeps the cheapest solution.
pub fn solve(inst: &MetricInstance, params: &Params) -> Result<SolveReport> {
    let prep = prepare(inst, params)?;
    let simple = prepare_simple(inst, params)?;
    let trials = params.trials.max(1);
    let rounds: Vec<(SolutionReport, SolutionReport)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut b = run_simple(&simple, t)?;
            b.lp_value = prep.lp_star.objective;
            b.ratio_vs_lp = ratio(b.objective, b.lp_value);
            Ok((run_pcotsp(&prep, t)?, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = rounds
        .iter()
        .flat_map(|(a, b)| [a, b])
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .expect("at least one trial")
        .clone();
    let alg1: Vec<f64> = rounds.iter().map(|r| r.0.objective).collect();
    let alg2: Vec<f64> = rounds.iter().map(|r| r.1.objective).collect();
    Ok(SolveReport {
        best,
        lp_value: prep.lp_star.objective,
        trials,
        pcotsp: TrialStats::of(&alg1),
        simple: TrialStats::of(&alg2),
        join_over_z: rounds.iter().filter(|r| r.0.join_within_z == Some(false)).count(),
        split_off: prep.split.clone(),
        y_cap_tight: prep.lp_star.y_cap_tight(),
        penalty_ratios: prep.penalty_ratios(),
    })
}
