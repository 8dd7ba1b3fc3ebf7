//! Multi-trial Monte Carlo harness, scaling fits and the built-in presets.
//!
//! Trial `i` at sweep point `j` draws its graph from `derive_seed(seed, [j, i, 0])`
//! and its run from `derive_seed(seed, [j, i, 1])`; every algorithm in the
//! config sees the same graph and run seed. Trials run in parallel but are
//! reduced in index order, so reports are bit-stable.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{derive_seed, run, AlgorithmConfig, Outcome, RunResult, DEFAULT_MAX_ROUNDS};
use crate::graph::{Graph, GraphError};
use crate::mis::{MisParams, ParamError, Schedule};
use crate::parse::GraphSpec;
use crate::verify::check_outcome;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("verification failed for {algorithm} on {graph} (graph seed {graph_seed}, run seed {run_seed}): {reason}")]
    Verification {
        algorithm: String,
        graph: String,
        graph_seed: u64,
        run_seed: u64,
        reason: String,
    },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("x values are all equal")]
    DegenerateX,
}

/// Graph family swept by an experiment. The sweep parameter is the node
/// count, except for `Cliques` where it is the family parameter `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    Gnp { p: f64 },
    Cliques,
    Complete,
    Ring,
    Path,
    Empty,
}

impl Family {
    pub fn graph_spec(&self, param: usize) -> GraphSpec {
        match *self {
            Family::Gnp { p } => GraphSpec::Gnp { n: param, p },
            Family::Cliques => GraphSpec::Cliques(param),
            Family::Complete => GraphSpec::Complete(param),
            Family::Ring => GraphSpec::Ring(param),
            Family::Path => GraphSpec::Path(param),
            Family::Empty => GraphSpec::Empty(param),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Gnp { .. } => "gnp",
            Family::Cliques => "cliques",
            Family::Complete => "complete",
            Family::Ring => "ring",
            Family::Path => "path",
            Family::Empty => "empty",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub family: Family,
    pub sweep: Vec<usize>,
    pub algorithms: Vec<AlgorithmConfig>,
    pub trials: u32,
    pub seed: u64,
    pub max_rounds: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(ExperimentError::Config("trials must be at least 1".into()));
        }
        if self.sweep.is_empty() {
            return Err(ExperimentError::Config("sweep is empty".into()));
        }
        if self.algorithms.is_empty() {
            return Err(ExperimentError::Config("no algorithm given".into()));
        }
        if self.max_rounds == 0 {
            return Err(ExperimentError::Config(
                "max_rounds must be at least 1".into(),
            ));
        }
        for algo in &self.algorithms {
            algo.validate()?;
        }
        for &param in &self.sweep {
            // Surfaces bad sizes (ring:2, complete:0, ...) before any work.
            self.family
                .graph_spec(param)
                .to_string()
                .parse::<GraphSpec>()
                .map_err(|e| ExperimentError::Config(e.to_string()))?;
        }
        Ok(())
    }
}

/// Least-squares line with its root-mean-square residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub fn fit_scaling(points: &[(f64, f64)]) -> Result<Fit, FitError> {
    if points.len() < 2 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) {
        return Err(FitError::DegenerateX);
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).powi(2))
        .sum();
    Ok(Fit {
        slope,
        intercept,
        residual: (sse / k).sqrt(),
    })
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Statistics for one algorithm at one sweep point. Round and beep figures
/// are over terminated runs only; capped runs show up in `censored_fraction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointStats {
    pub family: String,
    pub param: usize,
    /// Node count of the graphs at this point.
    pub n: usize,
    pub max_degree_mean: f64,
    pub trials: u32,
    pub terminated: u32,
    pub censored_fraction: f64,
    pub mean_rounds: Option<f64>,
    pub sd_rounds: Option<f64>,
    pub min_rounds: Option<u64>,
    pub max_rounds: Option<u64>,
    /// Mean over runs of the per-node average first-exchange beep count.
    pub mean_beeps: Option<f64>,
    /// Standard error of `mean_beeps` across runs.
    pub stderr_beeps: Option<f64>,
    /// Largest beep count of any single node in any terminated run.
    pub max_node_beeps: Option<u32>,
    /// Mean number of colours used (colouring only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_colors: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub algorithm: String,
    pub config: AlgorithmConfig,
    pub points: Vec<PointStats>,
    /// Mean rounds against `log2 n`.
    pub fit_log: Option<Fit>,
    /// Mean rounds against `(log2 n)^2`.
    pub fit_log_squared: Option<Fit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub total_runs: u64,
    pub series: Vec<Series>,
}

pub const CSV_HEADER: &str =
    "algorithm,family,param,n,mean_rounds,sd_rounds,mean_beeps,censored_fraction";

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise") + "\n"
    }

    /// One row per (algorithm, sweep point).
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for s in &self.series {
            for p in &s.points {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    s.algorithm,
                    p.family,
                    p.param,
                    p.n,
                    opt(p.mean_rounds),
                    opt(p.sd_rounds),
                    opt(p.mean_beeps),
                    p.censored_fraction
                ));
            }
        }
        out
    }

    /// Fixed-width summary for terminals.
    pub fn summary_table(&self) -> String {
        let mut out = format!(
            "{:<18} {:>6} {:>6} {:>10} {:>9} {:>10} {:>9} {:>9}\n",
            "algorithm", "param", "n", "rounds", "sd", "rnd/log2n", "beeps", "censored"
        );
        let f = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
        for s in &self.series {
            for p in &s.points {
                let ratio = p.mean_rounds.map(|r| r / (p.n.max(2) as f64).log2());
                out.push_str(&format!(
                    "{:<18} {:>6} {:>6} {:>10} {:>9} {:>10} {:>9} {:>9.3}\n",
                    s.algorithm,
                    p.param,
                    p.n,
                    f(p.mean_rounds),
                    f(p.sd_rounds),
                    f(ratio),
                    f(p.mean_beeps),
                    p.censored_fraction
                ));
            }
            for (label, fit) in [("log2 n", s.fit_log), ("log2^2 n", s.fit_log_squared)] {
                if let Some(fit) = fit {
                    out.push_str(&format!(
                        "  {} fit vs {label}: slope {:.4}, intercept {:.4}, rms residual {:.4}\n",
                        s.algorithm, fit.slope, fit.intercept, fit.residual
                    ));
                }
            }
        }
        out
    }
}

struct TrialRecord {
    n: usize,
    max_degree: usize,
    result: RunResult,
}

fn trial_graph(
    cfg: &ExperimentConfig,
    j: usize,
    i: u32,
    cache: &Option<Graph>,
) -> Result<(Graph, u64), GraphError> {
    let graph_seed = derive_seed(cfg.seed, &[j as u64, u64::from(i), 0]);
    let graph = match cache {
        Some(g) => g.clone(),
        None => cfg.family.graph_spec(cfg.sweep[j]).build(graph_seed)?,
    };
    Ok((graph, graph_seed))
}

fn run_trial(
    cfg: &ExperimentConfig,
    j: usize,
    i: u32,
    cache: &Option<Graph>,
) -> Result<Vec<TrialRecord>, ExperimentError> {
    let (graph, graph_seed) = trial_graph(cfg, j, i, cache)?;
    let run_seed = derive_seed(cfg.seed, &[j as u64, u64::from(i), 1]);
    cfg.algorithms
        .iter()
        .map(|algo| {
            let result = run(&graph, algo, run_seed, cfg.max_rounds);
            if result.terminated {
                let verdict = check_outcome(&graph, &result.outcome)
                    .map_err(|e| ExperimentError::Config(e.to_string()))?;
                if !verdict.pass {
                    return Err(ExperimentError::Verification {
                        algorithm: algo.name().to_string(),
                        graph: cfg.family.graph_spec(cfg.sweep[j]).to_string(),
                        graph_seed,
                        run_seed,
                        reason: verdict.reason,
                    });
                }
            }
            Ok(TrialRecord {
                n: graph.node_count(),
                max_degree: graph.max_degree(),
                result,
            })
        })
        .collect()
}

fn summarise(family: &Family, param: usize, records: &[&TrialRecord]) -> PointStats {
    let trials = records.len() as u32;
    let done: Vec<&&TrialRecord> = records.iter().filter(|r| r.result.terminated).collect();
    let rounds: Vec<f64> = done.iter().map(|r| r.result.rounds_used as f64).collect();
    let beeps: Vec<f64> = done.iter().map(|r| r.result.mean_beeps()).collect();
    let colors: Vec<f64> = done
        .iter()
        .filter_map(|r| match &r.result.outcome {
            Outcome::Coloring { colors } => Some(f64::from(
                colors.iter().flatten().copied().max().unwrap_or(0),
            )),
            Outcome::Mis { .. } => None,
        })
        .collect();
    let (mean_rounds, sd_rounds) = if rounds.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_sd(&rounds);
        (Some(m), Some(s))
    };
    let (mean_beeps, stderr_beeps) = if beeps.is_empty() {
        (None, None)
    } else {
        let (m, s) = mean_sd(&beeps);
        (Some(m), Some(s / (beeps.len() as f64).sqrt()))
    };
    PointStats {
        family: family.name().to_string(),
        param,
        n: records.first().map_or(0, |r| r.n),
        max_degree_mean: records.iter().map(|r| r.max_degree as f64).sum::<f64>()
            / f64::from(trials),
        trials,
        terminated: done.len() as u32,
        censored_fraction: f64::from(trials - done.len() as u32) / f64::from(trials),
        mean_rounds,
        sd_rounds,
        min_rounds: done.iter().map(|r| r.result.rounds_used).min(),
        max_rounds: done.iter().map(|r| r.result.rounds_used).max(),
        mean_beeps,
        stderr_beeps,
        max_node_beeps: done
            .iter()
            .flat_map(|r| r.result.beeps_per_node.iter().copied())
            .max(),
        mean_colors: (!colors.is_empty()).then(|| mean_sd(&colors).0),
    }
}

fn fits(points: &[PointStats]) -> (Option<Fit>, Option<Fit>) {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.mean_rounds.map(|r| ((p.n.max(2) as f64).log2(), r)))
        .collect();
    let squared: Vec<(f64, f64)> = xy.iter().map(|&(x, y)| (x * x, y)).collect();
    (fit_scaling(&xy).ok(), fit_scaling(&squared).ok())
}

/// Runs every trial on the current rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    // Deterministic families build one graph per sweep point.
    let caches: Vec<Option<Graph>> = cfg
        .sweep
        .iter()
        .map(|&param| {
            let spec = cfg.family.graph_spec(param);
            if spec.is_random() {
                Ok(None)
            } else {
                spec.build(0).map(Some)
            }
        })
        .collect::<Result<_, _>>()?;

    let jobs: Vec<(usize, u32)> = (0..cfg.sweep.len())
        .flat_map(|j| (0..cfg.trials).map(move |i| (j, i)))
        .collect();
    let records: Vec<Vec<TrialRecord>> = jobs
        .par_iter()
        .map(|&(j, i)| run_trial(cfg, j, i, &caches[j]))
        .collect::<Result<_, _>>()?;

    let trials = cfg.trials as usize;
    let series = cfg
        .algorithms
        .iter()
        .enumerate()
        .map(|(a, algo)| {
            let points: Vec<PointStats> = cfg
                .sweep
                .iter()
                .enumerate()
                .map(|(j, &param)| {
                    let recs: Vec<&TrialRecord> = records[j * trials..(j + 1) * trials]
                        .iter()
                        .map(|r| &r[a])
                        .collect();
                    summarise(&cfg.family, param, &recs)
                })
                .collect();
            let (fit_log, fit_log_squared) = fits(&points);
            Series {
                algorithm: algo.name().to_string(),
                config: algo.clone(),
                points,
                fit_log,
                fit_log_squared,
            }
        })
        .collect();

    Ok(ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: cfg.clone(),
        total_runs: (jobs.len() * cfg.algorithms.len()) as u64,
        series,
    })
}

/// Runs on a dedicated pool of `jobs` workers.
pub fn run_experiment_with_jobs(
    cfg: &ExperimentConfig,
    jobs: usize,
) -> Result<ExperimentReport, ExperimentError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    pool.install(|| run_experiment(cfg))
}

/// G(n, 1/2) for n = 20, 40, ..., 200 with the default feedback MIS.
pub fn preset_paper_gnp() -> ExperimentConfig {
    ExperimentConfig {
        name: "paper-gnp".into(),
        family: Family::Gnp { p: 0.5 },
        sweep: (1..=10).map(|k| 20 * k).collect(),
        algorithms: vec![AlgorithmConfig::MisFeedback {
            params: MisParams::default(),
        }],
        trials: 100,
        seed: 0,
        max_rounds: DEFAULT_MAX_ROUNDS,
    }
}

/// Hold factor of the global ramp used by the separation preset.
pub const SEPARATION_HOLD_FACTOR: f64 = 1.0;

/// Clique families m = 3..=12 under feedback MIS and a global geometric ramp.
pub fn preset_lower_bound_separation() -> ExperimentConfig {
    ExperimentConfig {
        name: "lower-bound".into(),
        family: Family::Cliques,
        sweep: (3..=12).collect(),
        algorithms: vec![
            AlgorithmConfig::MisFeedback {
                params: MisParams::default(),
            },
            AlgorithmConfig::MisGlobal {
                schedule: Schedule::Sweep {
                    hold_factor: SEPARATION_HOLD_FACTOR,
                },
            },
        ],
        // The log vs log^2 residual gap is within noise at a few dozen trials.
        trials: 1000,
        seed: 0,
        max_rounds: DEFAULT_MAX_ROUNDS,
    }
}

/// Greedy colouring on G(n, 1/2), n = 20..=200.
pub fn preset_coloring_gnp() -> ExperimentConfig {
    ExperimentConfig {
        name: "coloring-gnp".into(),
        algorithms: vec![AlgorithmConfig::ColoringFeedback {
            params: MisParams::default(),
        }],
        ..preset_paper_gnp()
    }
}

/// Greedy colouring on complete graphs `K_{Δ+1}` for Δ in {5, 10, 20, 40}.
pub fn preset_coloring_complete() -> ExperimentConfig {
    ExperimentConfig {
        name: "coloring-complete".into(),
        family: Family::Complete,
        sweep: vec![6, 11, 21, 41],
        algorithms: vec![AlgorithmConfig::ColoringFeedback {
            params: MisParams::default(),
        }],
        trials: 100,
        seed: 0,
        max_rounds: DEFAULT_MAX_ROUNDS,
    }
}

pub const PRESET_NAMES: [&str; 4] = [
    "paper-gnp",
    "lower-bound",
    "coloring-gnp",
    "coloring-complete",
];

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    match name {
        "paper-gnp" => Some(preset_paper_gnp()),
        "lower-bound" => Some(preset_lower_bound_separation()),
        "coloring-gnp" => Some(preset_coloring_gnp()),
        "coloring-complete" => Some(preset_coloring_complete()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_examples() {
        let fit = fit_scaling(&[(1.0, 2.5), (2.0, 5.0)]).unwrap();
        assert!(
            (fit.slope - 2.5).abs() < 1e-12 && fit.intercept.abs() < 1e-12 && fit.residual < 1e-12
        );
        let line: Vec<(f64, f64)> = (0..10)
            .map(|i| (f64::from(i), 3.0 * f64::from(i) - 1.0))
            .collect();
        assert!(fit_scaling(&line).unwrap().residual < 1e-12);
        let flat = fit_scaling(&[(1.0, 4.0), (2.0, 4.0), (5.0, 4.0)]).unwrap();
        assert_eq!(flat.slope, 0.0);
        assert_eq!(fit_scaling(&[(1.0, 1.0)]), Err(FitError::TooFewPoints(1)));
        assert_eq!(
            fit_scaling(&[(2.0, 1.0), (2.0, 3.0)]),
            Err(FitError::DegenerateX)
        );
    }

    #[test]
    fn fit_residual_is_rms() {
        // Points (0,0), (1,1), (2,0): slope 0, intercept 1/3, residuals -1/3, 2/3, -1/3.
        let fit = fit_scaling(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert!((fit.intercept - 1.0 / 3.0).abs() < 1e-12);
        assert!((fit.residual - (6.0f64 / 27.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn presets_have_expected_shape() {
        let gnp = preset_paper_gnp();
        assert_eq!(gnp.sweep.len(), 10);
        assert_eq!(gnp.trials, 100);
        assert_eq!(
            gnp.algorithms,
            vec![AlgorithmConfig::MisFeedback {
                params: MisParams::default()
            }]
        );
        let lb = preset_lower_bound_separation();
        assert_eq!(lb.sweep, (3..=12).collect::<Vec<_>>());
        assert_eq!(
            Family::Cliques
                .graph_spec(12)
                .build(0)
                .unwrap()
                .node_count(),
            936
        );
        for name in PRESET_NAMES {
            preset(name).unwrap().validate().unwrap();
        }
        assert!(preset("nope").is_none());
    }

    #[test]
    fn invalid_configs_rejected() {
        let base = ExperimentConfig {
            trials: 2,
            ..preset_paper_gnp()
        };
        assert!(ExperimentConfig {
            trials: 0,
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            sweep: vec![],
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            algorithms: vec![],
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            family: Family::Ring,
            sweep: vec![2],
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(ExperimentConfig {
            family: Family::Gnp { p: 2.0 },
            ..base
        }
        .validate()
        .is_err());
    }

    #[test]
    fn small_experiment_is_reproducible() {
        let cfg = ExperimentConfig {
            trials: 5,
            sweep: vec![10, 20],
            seed: 17,
            ..preset_lower_bound_separation()
        };
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment_with_jobs(&cfg, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.total_runs, 20);
        assert_eq!(a.series.len(), 2);
        // Regenerate from the embedded config.
        let again: ExperimentReport = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(
            run_experiment(&again.config).unwrap().to_json(),
            a.to_json()
        );
    }

    #[test]
    fn csv_has_one_row_per_point() {
        let cfg = ExperimentConfig {
            trials: 3,
            seed: 1,
            ..preset_paper_gnp()
        };
        let report = run_experiment(&cfg).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.count(), 10);
    }

    #[test]
    fn censored_runs_are_counted_not_fatal() {
        let cfg = ExperimentConfig {
            name: "stuck".into(),
            family: Family::Complete,
            sweep: vec![1, 2],
            algorithms: vec![AlgorithmConfig::MisGlobal {
                schedule: Schedule::Constant { p: 1.0 },
            }],
            trials: 4,
            seed: 3,
            max_rounds: 20,
        };
        let report = run_experiment(&cfg).unwrap();
        let pts = &report.series[0].points;
        assert_eq!(pts[0].censored_fraction, 0.0);
        assert_eq!(pts[0].mean_rounds, Some(1.0));
        assert_eq!(pts[1].censored_fraction, 1.0);
        assert_eq!(pts[1].mean_rounds, None);
        assert!(report.to_csv().lines().nth(2).unwrap().ends_with(",,,1"));
    }
}
