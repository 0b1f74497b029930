use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use trace_core::bench;
use trace_core::engine::Algorithm;
use trace_harness::config::{EvaluatorDescriptor, ExperimentConfig};
use trace_harness::experiment::run_experiment;

#[derive(Parser)]
#[command(name = "trace-bo", version, about = "Constrained Bayesian optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one or more algorithms for several seeds and write all result files.
    Run(RunArgs),
    /// Exhaustive grid search on a built-in 2-D problem.
    Oracle {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 1000)]
        resolution: usize,
    },
    /// Check that exact tier-1 ranking recovers the feasible set on a grid.
    Theorem1 {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 101)]
        resolution: usize,
        /// Analytic boundary points added to the grid.
        #[arg(long, default_value_t = 100)]
        boundary: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Full experiment file; other flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in problem name, or a TOML file describing an evaluator.
    #[arg(long)]
    problem: Option<String>,
    /// Comma-separated list from trace, mace, eipf, pipf, pso.
    #[arg(long, value_delimiter = ',')]
    algo: Vec<Algorithm>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    init: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

fn problem_descriptor(arg: &str) -> Result<EvaluatorDescriptor> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        return toml::from_str(&text).with_context(|| format!("parsing evaluator description {arg}"));
    }
    Ok(EvaluatorDescriptor::Builtin { name: arg.to_string() })
}

fn build_config(a: RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let Some(problem) = &a.problem else { bail!("either --config or --problem is required") };
            let problem = problem_descriptor(problem)?;
            let reference = match &problem {
                EvaluatorDescriptor::Builtin { name } => bench::problem(name).ok().and_then(|p| p.reference),
                EvaluatorDescriptor::External(_) => None,
            };
            let (Some(budget), Some(init)) = (
                a.budget.or(reference.map(|r| r.budget)),
                a.init.or(reference.map(|r| r.init)),
            ) else {
                bail!("--budget and --init are required for this problem")
            };
            ExperimentConfig {
                problem,
                algorithms: vec![Algorithm::Trace],
                budget,
                init,
                runs: 1,
                base_seed: 0,
                output_dir: PathBuf::from("results"),
                workers: None,
                inner: Default::default(),
                acquisition: Default::default(),
                fit: Default::default(),
            }
        }
    };
    if a.config.is_some() {
        if let Some(p) = &a.problem {
            cfg.problem = problem_descriptor(p)?;
        }
    }
    if !a.algo.is_empty() {
        cfg.algorithms = a.algo;
    }
    cfg.budget = a.budget.unwrap_or(cfg.budget);
    cfg.init = a.init.unwrap_or(cfg.init);
    cfg.runs = a.runs.unwrap_or(cfg.runs);
    cfg.base_seed = a.seed.unwrap_or(cfg.base_seed);
    cfg.output_dir = a.out.unwrap_or(cfg.output_dir);
    cfg.workers = a.workers.or(cfg.workers);
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().command {
        Cmd::Run(args) => {
            let cfg = build_config(args)?;
            let report = run_experiment(&cfg)?;
            print!("{}", report.table);
            for f in &report.failures {
                eprintln!("run {} of {} (seed {}) aborted: {}", f.run, f.algorithm, f.seed, f.message);
            }
            println!("results in {}", cfg.output_dir.display());
            Ok(if report.success() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Cmd::Oracle { problem, resolution } => {
            let p = bench::problem(&problem)?;
            let o = bench::feasible_grid_oracle(&p, resolution)?;
            println!("problem {problem}, {resolution}x{resolution} grid");
            println!("feasible fraction {:.6}", o.feasible_fraction());
            match &o.best {
                Some((x, v)) => println!("best feasible {v} at {x:?}"),
                None => println!("no feasible grid point"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Theorem1 { problem, resolution, boundary } => {
            let p = bench::problem(&problem)?;
            let grid = bench::boundary_augmented_grid(&p, resolution, boundary)?;
            let ok = bench::theorem1_check(&p, &grid)?;
            println!("{problem}: {} points, tier-1 front equals feasible set: {ok}", grid.len());
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}
