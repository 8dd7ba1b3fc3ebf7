use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use beepsim::config::{ConfigFile, OneOrMany};
use beepsim::engine::{run_with, RunOptions, RunResult, DEFAULT_MAX_ROUNDS};
use beepsim::experiments::{run_experiment, run_experiment_with_jobs};
use beepsim::graph::{load_edge_list, save_edge_list, Graph};
use beepsim::parse::{build_algorithm, GraphSpec};
use beepsim::verify::{check_outcome, parse_outcome_json, Verdict};
use serde::Serialize;

use crate::{AlgorithmFlags, ExperimentArgs, GenArgs, RunArgs, VerifyArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_UNTERMINATED: u8 = 2;
pub const EXIT_VERIFY_FAILED: u8 = 3;

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_config(path: Option<&PathBuf>) -> Result<ConfigFile> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(ConfigFile::parse(&text)?)
        }
        None => Ok(ConfigFile::default()),
    }
}

fn flags_config(algo: AlgorithmFlags) -> ConfigFile {
    ConfigFile {
        algorithm: algo.algorithm.map(OneOrMany::One),
        p0: algo.p0,
        f1: algo.f1,
        f2: algo.f2,
        init_rule: algo.init_rule,
        f_rule: algo.f_rule,
        schedule: algo.schedule,
        ..ConfigFile::default()
    }
}

pub fn gen(args: GenArgs) -> Result<u8> {
    let Some(spec) = args.spec.or(args.gen) else {
        bail!("missing generator spec (e.g. `beepsim gen complete:3`)");
    };
    let graph = spec.parse::<GraphSpec>()?.build(args.seed)?;
    write_output(args.out.as_deref(), &save_edge_list(&graph))?;
    Ok(EXIT_OK)
}

/// `run --format json` output: the run result plus graph facts and verdict.
#[derive(Serialize)]
struct RunReport<'a> {
    graph: String,
    nodes: usize,
    edges: usize,
    max_degree: usize,
    #[serde(flatten)]
    result: &'a RunResult,
    verified: Option<bool>,
    verdict: String,
}

fn load_graph(cfg: &ConfigFile, seed: u64) -> Result<(Graph, String)> {
    match (&cfg.graph, &cfg.gen) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            let graph = load_edge_list(&text).with_context(|| format!("parsing {path}"))?;
            Ok((graph, path.clone()))
        }
        (None, Some(spec)) => {
            let spec: GraphSpec = spec.parse()?;
            Ok((spec.build(seed)?, spec.to_string()))
        }
        (Some(_), Some(_)) => bail!("give either --graph or --gen, not both"),
        (None, None) => bail!("missing graph source: --graph FILE or --gen SPEC"),
    }
}

pub fn run(args: RunArgs) -> Result<u8> {
    let file = read_config(args.config.as_ref())?;
    let cfg = ConfigFile {
        graph: args.graph.map(|p| p.display().to_string()),
        gen: args.gen,
        seed: args.seed,
        max_rounds: args.max_rounds,
        format: args.format,
        out: args.out.map(|p| p.display().to_string()),
        transcript: args.transcript.map(|p| p.display().to_string()),
        ..flags_config(args.algo)
    }
    .or(file);

    let names = cfg
        .algorithm
        .as_ref()
        .map(OneOrMany::names)
        .unwrap_or_else(|| vec!["mis-feedback".into()]);
    let [name] = names.as_slice() else {
        bail!("`run` takes exactly one algorithm");
    };
    let algorithm = build_algorithm(name, &cfg.algorithm_args())?;
    let max_rounds = cfg.max_rounds.unwrap_or(DEFAULT_MAX_ROUNDS);
    if max_rounds == 0 {
        bail!("--max-rounds must be at least 1");
    }
    let format = cfg.format.as_deref().unwrap_or("text");
    if !matches!(format, "text" | "json" | "csv") {
        bail!("unknown format {format:?}; expected text, json or csv");
    }
    let seed = match cfg.seed {
        Some(s) => s,
        None => {
            let s = rand::random::<u64>();
            eprintln!("seed: {s}");
            s
        }
    };

    let (graph, source) = load_graph(&cfg, seed)?;
    let options = RunOptions {
        max_rounds,
        record_transcript: cfg.transcript.is_some(),
        visit_order: None,
    };
    let result = run_with(&graph, &algorithm, seed, &options);
    let verdict = if result.terminated {
        Some(check_outcome(&graph, &result.outcome)?)
    } else {
        None
    };

    if let (Some(path), Some(lines)) = (&cfg.transcript, result.transcript_jsonl()) {
        fs::write(path, lines).with_context(|| format!("writing {path}"))?;
    }

    let verdict_text = match &verdict {
        Some(Verdict { pass: true, reason }) => format!("PASS: {reason}"),
        Some(Verdict {
            pass: false,
            reason,
        }) => format!("FAIL: {reason}"),
        None => format!("UNTERMINATED after {} rounds", result.rounds_used),
    };
    let text = match format {
        "json" => {
            let report = RunReport {
                graph: source,
                nodes: graph.node_count(),
                edges: graph.edge_count(),
                max_degree: graph.max_degree(),
                result: &result,
                verified: verdict.as_ref().map(|v| v.pass),
                verdict: verdict_text.clone(),
            };
            serde_json::to_string_pretty(&report)? + "\n"
        }
        "csv" => format!(
            "algorithm,nodes,edges,rounds,time_steps,terminated,mean_beeps,seed,verified\n{},{},{},{},{},{},{},{},{}\n",
            result.algorithm,
            graph.node_count(),
            graph.edge_count(),
            result.rounds_used,
            result.time_steps,
            result.terminated,
            result.mean_beeps(),
            seed,
            verdict.as_ref().is_some_and(|v| v.pass)
        ),
        _ => text_summary(&source, &graph, &result, &verdict_text),
    };
    write_output(cfg.out.as_deref().map(Path::new), &text)?;

    Ok(match verdict {
        None => EXIT_UNTERMINATED,
        Some(v) if !v.pass => {
            eprintln!("verification failed (seed {seed}): {}", v.reason);
            EXIT_VERIFY_FAILED
        }
        Some(_) => EXIT_OK,
    })
}

fn text_summary(source: &str, graph: &Graph, result: &RunResult, verdict: &str) -> String {
    use beepsim::Outcome;
    let outcome = match &result.outcome {
        Outcome::Mis { members, undecided } => {
            let mut s = format!("mis: {members:?} (size {})", members.len());
            if !undecided.is_empty() {
                s.push_str(&format!("\nundecided: {undecided:?}"));
            }
            s
        }
        Outcome::Coloring { colors } => {
            let shown: Vec<String> = colors
                .iter()
                .map(|c| c.map_or("-".into(), |c| c.to_string()))
                .collect();
            let used = colors.iter().flatten().max().copied().unwrap_or(0);
            format!("colors: [{}] ({used} colours)", shown.join(", "))
        }
    };
    format!(
        "graph: {source} ({} nodes, {} edges, max degree {})\nalgorithm: {}\nseed: {}\n\
         rounds: {}\ntime steps: {}\nterminated: {}\nmean beeps per node: {:.4}\nmax beeps at a node: {}\n{outcome}\n{verdict}\n",
        graph.node_count(),
        graph.edge_count(),
        graph.max_degree(),
        result.algorithm,
        result.seed,
        result.rounds_used,
        result.time_steps,
        result.terminated,
        result.mean_beeps(),
        result.beeps_per_node.iter().max().copied().unwrap_or(0),
    )
}

pub fn verify(args: VerifyArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.graph)
        .with_context(|| format!("reading {}", args.graph.display()))?;
    let graph =
        load_edge_list(&text).with_context(|| format!("parsing {}", args.graph.display()))?;
    let text = fs::read_to_string(&args.outcome)
        .with_context(|| format!("reading {}", args.outcome.display()))?;
    let outcome =
        parse_outcome_json(&text).with_context(|| format!("parsing {}", args.outcome.display()))?;
    let verdict = check_outcome(&graph, &outcome)?;
    if verdict.pass {
        println!("PASS: {}", verdict.reason);
        Ok(EXIT_OK)
    } else {
        println!("FAIL: {}", verdict.reason);
        Ok(EXIT_USAGE)
    }
}

pub fn experiment(args: ExperimentArgs) -> Result<u8> {
    let file = read_config(args.config.as_ref())?;
    let cfg = ConfigFile {
        preset: args.preset,
        seed: args.seed,
        trials: args.trials,
        max_rounds: args.max_rounds,
        out: args.out.map(|p| p.display().to_string()),
        format: args.format,
        jobs: args.jobs,
        ..flags_config(args.algo)
    }
    .or(file);
    if cfg.preset.is_none() && cfg.family.is_none() {
        bail!("give a preset (paper-gnp, lower-bound, coloring-gnp, coloring-complete) or a --config file");
    }
    let format = cfg.format.as_deref().unwrap_or("text");
    if !matches!(format, "text" | "json" | "csv") {
        bail!("unknown format {format:?}; expected text, json or csv");
    }
    let experiment = cfg.experiment()?;
    let report = match cfg.jobs {
        Some(jobs) => run_experiment_with_jobs(&experiment, jobs)?,
        None => run_experiment(&experiment)?,
    };

    let stem = cfg.out.clone().unwrap_or_else(|| experiment.name.clone());
    let json_path = format!("{stem}.json");
    let csv_path = format!("{stem}.csv");
    if let Some(parent) = Path::new(&json_path)
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
    {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(&json_path, report.to_json()).with_context(|| format!("writing {json_path}"))?;
    fs::write(&csv_path, report.to_csv()).with_context(|| format!("writing {csv_path}"))?;

    match format {
        "json" => print!("{}", report.to_json()),
        "csv" => print!("{}", report.to_csv()),
        _ => {
            println!(
                "{} (seed {}, {} trials per point, {} runs)",
                experiment.name, experiment.seed, experiment.trials, report.total_runs
            );
            print!("{}", report.summary_table());
            println!("wrote {json_path} and {csv_path}");
        }
    }
    Ok(EXIT_OK)
}
