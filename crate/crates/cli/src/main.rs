use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use ccsim::config::{
    parse_kernel, ActivitySpec, ExperimentConfig, GraphSpec, PointDistribution, ProblemSpec,
};
use ccsim::datagen::{sample_points, standard_normal, two_gaussians, write_points_csv};
use ccsim::experiment::{run_experiment, train_experiment, verify_run, Summary};
use coreset_consensus::{stream_rng, Kernel, StreamPurpose};

#[derive(Parser)]
#[command(
    name = "ccsim",
    version,
    about = "Simulate distributed core-set consensus for minimum-enclosing-ball problems, \
             including SVM/SVDD/one-class training via their ball reductions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment (or a seed sweep) and write trace/summary artifacts
    Run(RunArgs),
    /// Re-check a finished run: coverage guarantee plus fixed-point audit
    Verify(VerifyArgs),
    /// Distributed SVM training: run, export the model, score holdout data
    Train(TrainArgs),
    /// Generate a synthetic dataset CSV
    Gen(GenArgs),
}

fn graph_spec(s: &str) -> Result<GraphSpec, String> {
    s.parse()
}

fn activity_spec(s: &str) -> Result<ActivitySpec, String> {
    s.parse()
}

/// Flags shared by every simulating subcommand.
#[derive(Args)]
struct NetArgs {
    /// Per-round digraph: er:P, ring, or file:PATH
    #[arg(long, default_value = "er:0.05", value_parser = graph_spec)]
    graph: GraphSpec,
    /// Node activity: on or bernoulli:Q
    #[arg(long, default_value = "on", value_parser = activity_spec)]
    activity: ActivitySpec,
    /// Root seed for graph, activity, initialization, and synthetic data
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5000)]
    max_rounds: u64,
    /// Declare convergence after this many unchanged rounds instead of the
    /// connectivity-based quiet period
    #[arg(long)]
    quiet_rounds: Option<u64>,
    /// Output directory for artifacts
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemKind {
    Random,
    Svm,
    Svdd,
    Oneclass,
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Normal,
    Uniform,
}

impl From<DistArg> for PointDistribution {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::Normal => PointDistribution::Normal,
            DistArg::Uniform => PointDistribution::Uniform,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Problem family
    #[arg(long, value_enum, default_value_t = ProblemKind::Random)]
    problem: ProblemKind,
    /// Node count (random problems; optional round-robin split for datasets)
    #[arg(long)]
    nodes: Option<usize>,
    /// Point dimension (random problems)
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Coordinate distribution for random problems
    #[arg(long, value_enum, default_value_t = DistArg::Normal)]
    distribution: DistArg,
    /// Dataset seed override for random problems (defaults to --seed)
    #[arg(long)]
    problem_seed: Option<u64>,
    /// CSV dataset for svm/svdd/oneclass problems
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Kernel: linear or gaussian:GAMMA
    #[arg(long, default_value = "linear", value_parser = parse_kernel)]
    kernel: Kernel,
    /// Slack penalty for svm/oneclass problems
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    /// Run this many consecutive seeds in parallel, one subdirectory each
    #[arg(long)]
    sweep: Option<u64>,
    #[command(flatten)]
    net: NetArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Directory holding a finished run's artifacts
    #[arg(long)]
    dir: PathBuf,
    /// Known optimal squared radius, for instances the oracle cannot solve
    #[arg(long)]
    r_star2: Option<f64>,
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled training CSV (coordinates, then a ±1 label column)
    #[arg(long)]
    dataset: PathBuf,
    /// Labeled holdout CSV to score the trained model on
    #[arg(long)]
    holdout: Option<PathBuf>,
    /// Kernel: linear or gaussian:GAMMA
    #[arg(long, default_value = "gaussian:0.5", value_parser = parse_kernel)]
    kernel: Kernel,
    /// Slack penalty
    #[arg(long = "C", default_value_t = 10.0)]
    c: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Spread points over this many nodes (default: one point per node)
    #[arg(long)]
    nodes: Option<usize>,
    #[command(flatten)]
    net: NetArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    /// Two labeled Gaussian clusters separated along the first axis
    TwoGaussians,
    /// Unlabeled standard-normal cloud
    Normal,
    /// Unlabeled uniform cloud on [-1, 1)^dim
    Uniform,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Distance between cluster means (two-gaussians only)
    #[arg(long, default_value_t = 3.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

fn run_config(args: &RunArgs, seed: u64) -> Result<ExperimentConfig> {
    let dataset = || {
        args.dataset
            .clone()
            .context("--dataset is required for this problem family")
    };
    let problem = match args.problem {
        ProblemKind::Random => ProblemSpec::Random {
            nodes: args.nodes.unwrap_or(20),
            dim: args.dim,
            distribution: args.distribution.into(),
            seed: args.problem_seed,
        },
        ProblemKind::Svm => ProblemSpec::Svm {
            dataset: dataset()?,
            kernel: args.kernel,
            c: args.c,
            nodes: args.nodes,
        },
        ProblemKind::Svdd => ProblemSpec::Svdd {
            dataset: dataset()?,
            kernel: args.kernel,
            nodes: args.nodes,
        },
        ProblemKind::Oneclass => ProblemSpec::Oneclass {
            dataset: dataset()?,
            kernel: args.kernel,
            c: args.c,
            nodes: args.nodes,
        },
    };
    Ok(ExperimentConfig {
        problem,
        epsilon: args.epsilon,
        graph: args.net.graph.clone(),
        activity: args.net.activity.clone(),
        seed,
        max_rounds: args.net.max_rounds,
        quiet_rounds: args.net.quiet_rounds,
    })
}

fn cmd_run(args: RunArgs) -> Result<i32> {
    if let Some(k) = args.sweep {
        let seeds: Vec<u64> = (args.net.seed..args.net.seed + k).collect();
        let mut results: Vec<(u64, Summary)> = seeds
            .par_iter()
            .map(|&seed| {
                let config = run_config(&args, seed)?;
                let out = args.net.out.join(format!("seed-{seed:04}"));
                Ok((seed, run_experiment(&config, &out)?))
            })
            .collect::<Result<_>>()?;
        results.sort_by_key(|(seed, _)| *seed);
        let mut worst = 0;
        for (seed, summary) in &results {
            println!("seed {seed}: {}", summary.describe());
            let code = summary.exit_code();
            worst = match (worst, code) {
                (3, _) | (_, 3) => 3,
                (2, _) | (_, 2) => 2,
                _ => 0,
            };
        }
        Ok(worst)
    } else {
        let config = run_config(&args, args.net.seed)?;
        let summary = run_experiment(&config, &args.net.out)?;
        println!("{}", summary.describe());
        Ok(summary.exit_code())
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let output = verify_run(&args.dir, args.r_star2)?;
    println!("{}", output.describe());
    Ok(if output.pass { 0 } else { 3 })
}

fn cmd_train(args: TrainArgs) -> Result<i32> {
    let config = ExperimentConfig {
        problem: ProblemSpec::Svm {
            dataset: args.dataset.clone(),
            kernel: args.kernel,
            c: args.c,
            nodes: args.nodes,
        },
        epsilon: args.epsilon,
        graph: args.net.graph.clone(),
        activity: args.net.activity.clone(),
        seed: args.net.seed,
        max_rounds: args.net.max_rounds,
        quiet_rounds: args.net.quiet_rounds,
    };
    let (summary, model) = train_experiment(&config, args.holdout.as_deref(), &args.net.out)?;
    println!("{}", summary.describe());
    if let Some(accuracy) = summary.holdout_accuracy {
        println!("holdout accuracy: {accuracy}");
    }
    if model.is_some() {
        println!("model written to {}", args.net.out.join("model.json").display());
    }
    Ok(summary.exit_code())
}

fn cmd_gen(args: GenArgs) -> Result<i32> {
    let (points, labeled) = match args.kind {
        GenKind::TwoGaussians => (
            two_gaussians(args.n, args.dim, args.separation, args.seed),
            true,
        ),
        GenKind::Normal => (standard_normal(args.n, args.dim, args.seed), false),
        GenKind::Uniform => {
            let mut rng = stream_rng(args.seed, StreamPurpose::Dataset, 0);
            (
                sample_points(args.n, args.dim, PointDistribution::Uniform, &mut rng),
                false,
            )
        }
    };
    write_points_csv(&args.out, &points, labeled)?;
    println!("wrote {} points to {}", points.len(), args.out.display());
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Train(args) => cmd_train(args),
        Command::Gen(args) => cmd_gen(args),
    }
}

fn main() {
    let code = match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}
