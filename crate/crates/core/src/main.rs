use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pcotsp::bench::{cmd_bench, cmd_constants, render_constants, render_table, BenchConfig, Family};
use pcotsp::decomp::{decompose, DecompCaps};
use pcotsp::instance::{gen_euclidean, gen_euclidean_pairs, validate, MetricInstance};
use pcotsp::lp::{lp_variant_for, solve_lp, LpMode};
use pcotsp::multipath::{solve_multipath, MultipathParams, DEFAULT_SIGMA0_PRIME};
use pcotsp::oracle::{exact_multipath, exact_pcotsp};
use pcotsp::pcotsp::{solve, Caps, Params, DEFAULT_ALPHA};
use pcotsp::{Error, Result};

/// Human-readable output; goes to stderr when the JSON report takes stdout.
macro_rules! say {
    ($g:expr, $($arg:tt)*) => {
        if $g.json.as_deref() == Some(Path::new("-")) {
            eprintln!($($arg)*);
        } else {
            println!($($arg)*);
        }
    };
}

#[derive(Parser)]
#[command(
    name = "pcotsp",
    version,
    about = "Prize-collecting ordered and multi-path TSP by LP rounding"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Base random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of randomized trials.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Write the machine-readable result to this file ("-" for stdout).
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Largest join set solved exactly.
    #[arg(long, global = true)]
    cap_join: Option<usize>,
    /// Largest LP support decomposed into trees.
    #[arg(long, global = true)]
    cap_decomp: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ordered,
    Pairs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Enumerated,
    CuttingPlane,
}

impl From<ModeArg> for LpMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Enumerated => LpMode::Enumerated,
            ModeArg::CuttingPlane => LpMode::CuttingPlane,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random Euclidean instance.
    Gen {
        #[arg(long, value_enum, default_value = "ordered")]
        family: FamilyArg,
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Ordered terminals, or number of pairs.
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        penalty_scale: f64,
    },
    /// Check an instance file and list every violation.
    Validate { instance: PathBuf },
    /// Solve the LP relaxation.
    Lp {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "cutting-plane")]
        mode: ModeArg,
    },
    /// Solve the LP and decompose each component into trees.
    Decompose {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "cutting-plane")]
        mode: ModeArg,
    },
    /// Run the randomized algorithms and keep the best solution.
    Solve {
        instance: PathBuf,
        /// Fail unless the instance has this terminal type.
        #[arg(long, value_enum)]
        variant: Option<FamilyArg>,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long = "sigma0p", default_value_t = DEFAULT_SIGMA0_PRIME)]
        sigma0_prime: f64,
    },
    /// Exact optimum of a small instance.
    Oracle { instance: PathBuf },
    /// Run a generated benchmark corpus.
    Bench {
        #[arg(long, value_enum, default_value = "ordered")]
        family: FamilyArg,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        instances: usize,
        #[arg(long, default_value_t = 1.0)]
        penalty_scale: f64,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long = "sigma0p", default_value_t = DEFAULT_SIGMA0_PRIME)]
        sigma0_prime: f64,
    },
    /// Print the algorithm constants.
    Constants {
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
    },
}

impl Global {
    fn caps(&self) -> Caps {
        let mut caps = Caps::default();
        if let Some(j) = self.cap_join {
            caps.join = j;
        }
        if let Some(d) = self.cap_decomp {
            caps.decomp = DecompCaps {
                support: d,
                ..caps.decomp
            };
        }
        caps
    }

    fn emit<T: Serialize>(&self, value: &T) -> Result<()> {
        let Some(path) = &self.json else { return Ok(()) };
        let text = serde_json::to_string_pretty(value).expect("reports serialize");
        if path == Path::new("-") {
            println!("{text}");
        } else {
            fs::write(path, text + "\n")?;
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match cli.cmd {
        Cmd::Gen {
            family,
            n,
            k,
            penalty_scale,
        } => {
            let inst = match family {
                FamilyArg::Ordered => gen_euclidean(n, k, g.seed, penalty_scale)?,
                FamilyArg::Pairs => gen_euclidean_pairs(n, k, g.seed, penalty_scale)?,
            };
            match &g.json {
                Some(p) if p != Path::new("-") => inst.save(p)?,
                _ => println!("{}", inst.to_json()),
            }
        }
        Cmd::Validate { instance } => {
            let inst = MetricInstance::load(&instance)?;
            let violations = validate(&inst);
            g.emit(&violations)?;
            for v in &violations {
                say!(g, "{v}");
            }
            if !violations.is_empty() {
                return Err(Error::InvalidInstance(format!("{} violation(s)", violations.len())));
            }
            say!(g, "ok: n={}, k={}", inst.n, inst.terminals.k());
        }
        Cmd::Lp { instance, mode } => {
            let inst = MetricInstance::load(&instance)?;
            let sol = solve_lp(&inst, lp_variant_for(&inst.terminals), mode.into())?;
            say!(
                g,
                "objective {:.6} (connection {:.6}, penalty {:.6}), {} rounds, {} cuts",
                sol.objective,
                sol.connection_cost,
                sol.penalty_cost,
                sol.rounds,
                sol.cuts
            );
            for (v, y) in sol.y_total.iter().enumerate() {
                say!(g, "  y[{v}] = {y:.6}");
            }
            g.emit(&sol)?;
        }
        Cmd::Decompose { instance, mode } => {
            let inst = MetricInstance::load(&instance)?;
            let sol = solve_lp(&inst, lp_variant_for(&inst.terminals), mode.into())?;
            let dists = sol
                .components
                .iter()
                .enumerate()
                .map(|(i, &(s, t))| decompose(&sol.x[i], &sol.y[i], s, t, &inst.cost, g.caps().decomp))
                .collect::<Result<Vec<_>>>()?;
            for (i, d) in dists.iter().enumerate() {
                say!(
                    g,
                    "component {i} ({}-{}): {} trees of {} candidates, expected cost {:.6} vs c(x_i) {:.6}",
                    d.s,
                    d.t,
                    d.trees.len(),
                    d.candidates,
                    d.expected_cost(),
                    sol.component_cost(i)
                );
            }
            g.emit(&dists)?;
        }
        Cmd::Solve {
            instance,
            variant,
            alpha,
            sigma0_prime,
        } => {
            let inst = MetricInstance::load(&instance)?;
            let ordered = inst.terminals.is_ordered();
            match variant {
                Some(FamilyArg::Ordered) if !ordered => {
                    return Err(Error::InvalidArgument("instance has terminal pairs".into()))
                }
                Some(FamilyArg::Pairs) if ordered => {
                    return Err(Error::InvalidArgument("instance has ordered terminals".into()))
                }
                _ => {}
            }
            let trials = g.trials.unwrap_or(16);
            if ordered {
                let mut params = Params::new(alpha)?.with_seed(g.seed).with_trials(trials);
                params.caps = g.caps();
                let rep = solve(&inst, &params)?;
                say!(
                    g,
                    "best {} objective {:.6} (tour {:.6}, penalty {:.6}), lp {:.6}, ratio {}",
                    rep.best.algorithm,
                    rep.best.objective,
                    rep.best.solution.tour_cost,
                    rep.best.solution.penalty_paid,
                    rep.lp_value,
                    rep.best.ratio_vs_lp.map_or("-".into(), |r| format!("{r:.4}"))
                );
                say!(g, "tour {:?}", rep.best.solution.route.vertices());
                g.emit(&rep)?;
            } else {
                let mut params = MultipathParams::new(sigma0_prime)?;
                params.seed = g.seed;
                params.trials = trials;
                params.caps = g.caps();
                let rep = solve_multipath(&inst, &params)?;
                say!(
                    g,
                    "best {} objective {:.6} (paths {:.6}, penalty {:.6}), lp {:.6}",
                    rep.best.algorithm,
                    rep.best.objective,
                    rep.best.solution.tour_cost,
                    rep.best.solution.penalty_paid,
                    rep.lp_value
                );
                if let pcotsp::instance::Route::PathCollection { paths } = &rep.best.solution.route {
                    for p in paths {
                        say!(g, "path {p:?}");
                    }
                }
                g.emit(&rep)?;
            }
        }
        Cmd::Oracle { instance } => {
            let inst = MetricInstance::load(&instance)?;
            let res = if inst.terminals.is_ordered() {
                exact_pcotsp(&inst)?
            } else {
                exact_multipath(&inst)?
            };
            say!(g, "optimum {:.9}", res.objective);
            say!(g, "route {:?}", res.solution.route);
            g.emit(&res)?;
        }
        Cmd::Bench {
            family,
            n,
            k,
            instances,
            penalty_scale,
            alpha,
            sigma0_prime,
        } => {
            let config = BenchConfig {
                family: match family {
                    FamilyArg::Ordered => Family::Ordered,
                    FamilyArg::Pairs => Family::Pairs,
                },
                n,
                k,
                instances,
                trials: g.trials.unwrap_or(200),
                seed: g.seed,
                penalty_scale,
                alpha,
                sigma0_prime,
            };
            let report = cmd_bench(&config);
            say!(g, "{}", render_table(&report).trim_end());
            g.emit(&report)?;
        }
        Cmd::Constants { alpha } => {
            let r = cmd_constants(alpha)?;
            say!(g, "{}", render_constants(&r).trim_end());
            g.emit(&r)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(4),
    }
}
