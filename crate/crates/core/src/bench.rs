//! Benchmark harness: generated instance families, repeated trials,
//! empirical ratios against the LP and the exact optimum.
//!
//! Reports carry no timing so reruns with the same seed serialize to
//! identical bytes.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::instance::{gen_euclidean, gen_euclidean_pairs, MetricInstance};
use crate::multipath::{
    multipath_branches, optimize_sigma0_prime, prepare_multipath, run_algorithm_a, run_algorithm_b, MultipathParams,
};
use crate::oracle::{exact_multipath, exact_pcotsp, EXACT_MULTIPATH_MAX_N, EXACT_PCOTSP_MAX_N};
use crate::pcotsp::{
    compute_constants, g_value, prepare, prepare_simple, run_pcotsp, run_simple, tour_factor, Params, BETA_PC,
};
use crate::rng::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Ordered,
    Pairs,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchConfig {
    pub family: Family,
    pub n: usize,
    /// Terminals (ordered) or pairs.
    pub k: usize,
    pub instances: usize,
    pub trials: usize,
    pub seed: u64,
    pub penalty_scale: f64,
    pub alpha: f64,
    pub sigma0_prime: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            family: Family::Ordered,
            n: 8,
            k: 3,
            instances: 20,
            trials: 200,
            seed: 0,
            penalty_scale: 1.0,
            alpha: crate::pcotsp::DEFAULT_ALPHA,
            sigma0_prime: crate::multipath::DEFAULT_SIGMA0_PRIME,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AlgorithmStats {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    pub mean_objective: f64,
    pub min_objective: f64,
    pub std_err: f64,
    pub mean_ratio_vs_lp: Option<f64>,
    pub ratio_std_err: Option<f64>,
    /// Mean objective over the exact optimum.
    pub ratio_vs_optimum: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct InstanceResult {
    pub index: usize,
    pub seed: u64,
    pub lp_value: f64,
    pub optimum: Option<f64>,
    pub algorithms: Vec<AlgorithmStats>,
    /// Set when the instance could not be prepared at all.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryRow {
    pub name: &'static str,
    pub instances: usize,
    pub mean_ratio_vs_lp: f64,
    pub max_ratio_vs_lp: f64,
    pub max_ratio_vs_optimum: Option<f64>,
    pub failures: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchReport {
    pub config: BenchConfig,
    pub results: Vec<InstanceResult>,
    pub summary: Vec<SummaryRow>,
}

fn stats(name: &'static str, values: &[f64], failures: usize, lp: f64, opt: Option<f64>) -> AlgorithmStats {
    let s = crate::report::TrialStats::of(values);
    let lp_ok = lp > 1e-12;
    AlgorithmStats {
        name,
        trials: values.len() + failures,
        failures,
        mean_objective: s.mean,
        min_objective: s.min,
        std_err: s.std_err,
        mean_ratio_vs_lp: lp_ok.then(|| s.mean / lp),
        ratio_std_err: lp_ok.then(|| s.std_err / lp),
        ratio_vs_optimum: opt.filter(|&o| o > 1e-12).map(|o| s.mean / o),
    }
}

/// Collects the objectives of `trials` rounds, counting failed rounds.
fn collect(trials: usize, mut f: impl FnMut(usize) -> Result<(f64, f64)>) -> (Vec<f64>, Vec<f64>, usize) {
    let (mut a, mut b, mut failures) = (Vec::new(), Vec::new(), 0);
    for t in 0..trials {
        match f(t) {
            Ok((x, y)) => {
                a.push(x);
                b.push(y);
            }
            Err(_) => failures += 1,
        }
    }
    (a, b, failures)
}

pub fn generate(config: &BenchConfig, index: usize) -> Result<MetricInstance> {
    let seed = derive_seed(config.seed, index as u64);
    match config.family {
        Family::Ordered => gen_euclidean(config.n, config.k, seed, config.penalty_scale),
        Family::Pairs => gen_euclidean_pairs(config.n, config.k, seed, config.penalty_scale),
    }
}

fn run_instance(config: &BenchConfig, index: usize) -> InstanceResult {
    let seed = derive_seed(config.seed, index as u64);
    let mut result = InstanceResult {
        index,
        seed,
        lp_value: f64::NAN,
        optimum: None,
        algorithms: Vec::new(),
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let inst = generate(config, index)?;
        match config.family {
            Family::Ordered => {
                let mut params = Params::new(config.alpha)?;
                params.seed = seed;
                let prep = prepare(&inst, &params)?;
                let simple = prepare_simple(&inst, &params)?;
                let lp = prep.lp_star.objective;
                let opt = (inst.n <= EXACT_PCOTSP_MAX_N)
                    .then(|| exact_pcotsp(&inst))
                    .transpose()?
                    .map(|r| r.objective);
                let (a, b, failures) = collect(config.trials, |t| {
                    Ok((run_pcotsp(&prep, t)?.objective, run_simple(&simple, t)?.objective))
                });
                let best: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
                result.lp_value = lp;
                result.optimum = opt;
                result.algorithms = vec![
                    stats("pcotsp", &a, failures, lp, opt),
                    stats("simple", &b, failures, lp, opt),
                    stats("best-of-both", &best, failures, lp, opt),
                ];
            }
            Family::Pairs => {
                let mut params = MultipathParams::new(config.sigma0_prime)?;
                params.seed = seed;
                let prep = prepare_multipath(&inst, &params)?;
                let lp = prep.lp.objective;
                let opt = (inst.n <= EXACT_MULTIPATH_MAX_N)
                    .then(|| exact_multipath(&inst))
                    .transpose()?
                    .map(|r| r.objective);
                let (a, b, failures) = collect(config.trials, |t| {
                    Ok((
                        run_algorithm_a(&prep, t)?.objective,
                        run_algorithm_b(&prep, t)?.objective,
                    ))
                });
                let coin: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
                result.lp_value = lp;
                result.optimum = opt;
                result.algorithms = vec![
                    stats("multipath-a", &a, failures, lp, opt),
                    stats("multipath-b", &b, failures, lp, opt),
                    stats("coin-flip", &coin, failures, lp, opt),
                ];
            }
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        result.error = Some(e.to_string());
    }
    result
}

pub fn cmd_bench(config: &BenchConfig) -> BenchReport {
    let results: Vec<InstanceResult> = (0..config.instances)
        .into_par_iter()
        .map(|i| run_instance(config, i))
        .collect();
    let names: Vec<&'static str> = results
        .iter()
        .find(|r| !r.algorithms.is_empty())
        .map(|r| r.algorithms.iter().map(|a| a.name).collect())
        .unwrap_or_default();
    let summary = names
        .iter()
        .enumerate()
        .map(|(j, &name)| {
            let rows: Vec<&AlgorithmStats> = results.iter().filter_map(|r| r.algorithms.get(j)).collect();
            let ratios: Vec<f64> = rows.iter().filter_map(|a| a.mean_ratio_vs_lp).collect();
            let opt: Vec<f64> = rows.iter().filter_map(|a| a.ratio_vs_optimum).collect();
            SummaryRow {
                name,
                instances: rows.len(),
                mean_ratio_vs_lp: ratios.iter().sum::<f64>() / ratios.len().max(1) as f64,
                max_ratio_vs_lp: ratios.iter().copied().fold(f64::NAN, f64::max),
                max_ratio_vs_optimum: (!opt.is_empty()).then(|| opt.iter().copied().fold(f64::NAN, f64::max)),
                failures: rows.iter().map(|a| a.failures).sum(),
            }
        })
        .collect();
    BenchReport {
        config: config.clone(),
        results,
        summary,
    }
}

fn opt_fmt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

pub fn render_table(report: &BenchReport) -> String {
    let mut out = String::new();
    let c = &report.config;
    let _ = writeln!(
        out,
        "{:?} family, n={}, k={}, {} instances x {} trials, seed {}",
        c.family, c.n, c.k, c.instances, c.trials, c.seed
    );
    let _ = writeln!(
        out,
        "{:>4} {:>10} {:>10}  {:<13} {:>10} {:>10} {:>9} {:>9}",
        "inst", "lp", "opt", "algorithm", "mean", "min", "mean/lp", "mean/opt"
    );
    for r in &report.results {
        if let Some(e) = &r.error {
            let _ = writeln!(out, "{:>4} error: {e}", r.index);
            continue;
        }
        for (j, a) in r.algorithms.iter().enumerate() {
            let (lp, opt) = if j == 0 {
                (format!("{:.4}", r.lp_value), opt_fmt(r.optimum))
            } else {
                (String::new(), String::new())
            };
            let _ = writeln!(
                out,
                "{:>4} {:>10} {:>10}  {:<13} {:>10.4} {:>10.4} {:>9} {:>9}",
                if j == 0 { r.index.to_string() } else { String::new() },
                lp,
                opt,
                a.name,
                a.mean_objective,
                a.min_objective,
                opt_fmt(a.mean_ratio_vs_lp),
                opt_fmt(a.ratio_vs_optimum),
            );
        }
    }
    let _ = writeln!(out, "\nsummary");
    for s in &report.summary {
        let _ = writeln!(
            out,
            "  {:<13} mean ratio vs lp {:.4}, max {:.4}, max vs opt {}, failures {}",
            s.name,
            s.mean_ratio_vs_lp,
            s.max_ratio_vs_lp,
            opt_fmt(s.max_ratio_vs_optimum),
            s.failures
        );
    }
    out
}

/// Every constant used by the algorithms, for a given target factor.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ConstantsReport {
    pub alpha: f64,
    pub theta: f64,
    pub sigma0: f64,
    pub beta: f64,
    pub half_inv_beta: f64,
    pub one_minus_two_beta_sigma0: f64,
    pub g_sigma0: f64,
    pub beta_pc: f64,
    pub tour_factor: f64,
    pub sigma0_prime: f64,
    pub rho: f64,
    pub multipath_tour_branch: f64,
    pub multipath_penalty_branch: f64,
}

pub fn cmd_constants(alpha: f64) -> Result<ConstantsReport> {
    let c = compute_constants(alpha)?;
    let s = optimize_sigma0_prime();
    let (tour, pen) = multipath_branches(s);
    Ok(ConstantsReport {
        alpha,
        theta: c.theta,
        sigma0: c.sigma0,
        beta: c.beta,
        half_inv_beta: 1.0 / (2.0 * c.beta),
        one_minus_two_beta_sigma0: 1.0 - 2.0 * c.beta * c.sigma0,
        g_sigma0: g_value(&c, c.sigma0),
        beta_pc: BETA_PC,
        tour_factor: tour_factor(alpha, BETA_PC)?,
        sigma0_prime: s,
        rho: (-s).exp() / (1.0 - s),
        multipath_tour_branch: tour,
        multipath_penalty_branch: pen,
    })
}

pub fn render_constants(r: &ConstantsReport) -> String {
    let rows = [
        ("alpha", r.alpha),
        ("theta = 1 - 1/alpha", r.theta),
        ("sigma0", r.sigma0),
        ("beta = 1/(3 sigma0 - theta)", r.beta),
        ("1/(2 beta)", r.half_inv_beta),
        ("1 - 2 beta sigma0", r.one_minus_two_beta_sigma0),
        ("g(sigma0)", r.g_sigma0),
        ("pctsp factor", r.beta_pc),
        ("tour factor", r.tour_factor),
        ("sigma0'", r.sigma0_prime),
        ("rho", r.rho),
        ("multipath tour branch", r.multipath_tour_branch),
        ("multipath penalty branch", r.multipath_penalty_branch),
    ];
    rows.iter().map(|(k, v)| format!("{k:<28} {v:.6}\n")).collect()
}
