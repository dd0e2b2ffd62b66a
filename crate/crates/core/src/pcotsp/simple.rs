use std::time::Instant;

use super::{check_instance, shortcut_ordered, with_resampling, Params, STAGE_BLOCK};
use crate::decomp::{decompose, TreeDistribution};
use crate::error::{Error, Result};
use crate::graph::{min_tjoin, MultiGraph};
use crate::instance::{MetricInstance, Route, Solution};
use crate::lp::{solve_contracted, ContractedInstance, StrollLpSolution};
use crate::report::{ratio, SolutionReport, StageCosts, Thresholds};
use crate::rng::stream;

const STAGE_FOREST: u64 = 8;

/// The terminal cycle plus a prize-collecting forest: the terminals are
/// merged into one root, the rooted relaxation is solved and decomposed, and
/// a sampled tree is lifted back to a forest hanging off the terminals.
#[derive(Clone, Debug)]
pub struct SimplePrepared {
    pub inst: MetricInstance,
    pub params: Params,
    pub contracted: ContractedInstance,
    pub lp: StrollLpSolution,
    pub dist: TreeDistribution,
}

pub fn prepare_simple(inst: &MetricInstance, params: &Params) -> Result<SimplePrepared> {
    check_instance(inst)?;
    if !inst.terminals.is_ordered() {
        return Err(Error::InvalidArgument("expected ordered terminals".into()));
    }
    let contracted = ContractedInstance::new(inst, &inst.terminals.vertices());
    let lp = solve_contracted(&contracted, params.lp_mode)?;
    let dist = decompose(&lp.x[0], &lp.y[0], 0, 0, &contracted.cost, params.caps.decomp)?;
    Ok(SimplePrepared {
        inst: inst.clone(),
        params: params.clone(),
        contracted,
        lp,
        dist,
    })
}

pub fn run_simple(sp: &SimplePrepared, trial: usize) -> Result<SolutionReport> {
    with_resampling(|attempt| run_simple_attempt(sp, trial, attempt))
}

fn run_simple_attempt(sp: &SimplePrepared, trial: usize, attempt: usize) -> Result<SolutionReport> {
    let start = Instant::now();
    let inst = &sp.inst;
    let seed = sp.params.seed;
    let order = inst.terminals.vertices();
    let mut rng = stream(seed, trial as u64, attempt as u64 * STAGE_BLOCK + STAGE_FOREST);

    let mut forest = MultiGraph::new(inst.n);
    for &(u, v) in sp.dist.sample_tree(&mut rng) {
        let (a, b) = sp.contracted.lift_edge(u, v);
        forest.add_edge_costed(a, b, &inst.cost);
    }
    let join = min_tjoin(&inst.cost, &forest.odd_vertices(), sp.params.caps.join)?;
    let mut h = MultiGraph::new(inst.n);
    for i in 0..order.len() {
        h.add_edge_costed(order[i], order[(i + 1) % order.len()], &inst.cost);
    }
    let cycle_cost = h.cost();
    h.extend(&forest);
    h.extend(&join.to_multigraph(&inst.cost));
    let tour = shortcut_ordered(&h, &order, &inst.is_terminal_mask())?;
    let solution = Solution::evaluate(inst, Route::OrderedTour { tour });
    // callers holding the ordered LP overwrite this with its value
    let lp_value = sp.lp.objective;
    Ok(SolutionReport {
        algorithm: "simple",
        seed,
        trial,
        objective: solution.objective,
        lp_value,
        ratio_vs_lp: ratio(solution.objective, lp_value),
        thresholds: Thresholds::default(),
        stage_costs: StageCosts {
            cycle: cycle_cost,
            trees: forest.cost(),
            pruned: None,
            pickup: None,
            join: Some(join.cost),
            z: None,
            multigraph: Some(h.cost()),
        },
        join_within_z: None,
        resampled: attempt,
        wall_time_ms: start.elapsed().as_millis() as u64,
        solution,
    })
}
