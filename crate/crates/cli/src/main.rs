//! `beepsim`: generate graphs, run beeping-model algorithms, verify outcomes
//! and run experiment sweeps.
//!
//! Exit codes: 0 success, 1 usage or I/O error (and a failed `verify`),
//! 2 run hit the round cap, 3 run produced an outcome that fails verification.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "beepsim",
    version,
    about = "Beeping-model MIS and greedy colouring simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a generated graph as an edge list.
    Gen(GenArgs),
    /// Run one simulation and verify its outcome.
    Run(RunArgs),
    /// Check an outcome file against a graph.
    Verify(VerifyArgs),
    /// Run a multi-trial experiment sweep.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Generator: gnp:N,P | complete:N | ring:N | path:N | cliques:M | empty:N
    spec: Option<String>,
    /// Same as the positional generator.
    #[arg(long = "gen", conflicts_with = "spec")]
    gen: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Algorithm flags shared by `run` and `experiment`.
#[derive(Debug, Args, Default)]
struct AlgorithmFlags {
    /// mis-feedback | mis-global | coloring-feedback
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    p0: Option<f64>,
    #[arg(long)]
    f1: Option<f64>,
    #[arg(long)]
    f2: Option<f64>,
    /// fixed | uniform
    #[arg(long)]
    init_rule: Option<String>,
    /// fixed | uniform
    #[arg(long)]
    f_rule: Option<String>,
    /// const:P | seq:P,... | ramp:START,RATIO[,hold=H][,cap=C][,cycle] | sweep:H
    #[arg(long)]
    schedule: Option<String>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Edge-list file.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Generator spec, as for `gen`.
    #[arg(long = "gen")]
    gen: Option<String>,
    #[command(flatten)]
    algo: AlgorithmFlags,
    /// Master seed; random (and printed) when omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_rounds: Option<u64>,
    /// text | json | csv
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the per-round transcript (JSON lines) here.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// TOML file whose keys mirror these flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    /// JSON outcome, or a `run --format json` report.
    #[arg(long)]
    outcome: PathBuf,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// paper-gnp | lower-bound | coloring-gnp | coloring-complete
    preset: Option<String>,
    #[command(flatten)]
    algo: AlgorithmFlags,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Output stem: writes STEM.json and STEM.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary printed on standard output: text | json | csv
    #[arg(long)]
    format: Option<String>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(commands::EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Run(args) => commands::run(args),
        Command::Verify(args) => commands::verify(args),
        Command::Experiment(args) => commands::experiment(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::EXIT_USAGE)
        }
    }
}
