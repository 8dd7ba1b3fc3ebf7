//! Config files for the command line. Keys mirror the long flags one to one
//! (`--max-rounds` is `max_rounds`); flags given on the command line win.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::DEFAULT_MAX_ROUNDS;
use crate::experiments::{preset, ExperimentConfig, Family};
use crate::parse::{build_algorithm, AlgorithmArgs, SpecError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Invalid(String),
}

/// `algorithm = "mis-feedback"` or `algorithm = ["mis-feedback", "mis-global"]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    pub fn names(&self) -> Vec<String> {
        match self {
            OneOrMany::One(s) => vec![s.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// Experiment preset to start from.
    pub preset: Option<String>,
    /// Experiment graph family: `gnp:P`, `cliques`, `complete`, `ring`, `path` or `empty`.
    pub family: Option<String>,
    /// Experiment sweep parameters.
    pub sweep: Option<Vec<usize>>,
    pub name: Option<String>,
    pub graph: Option<String>,
    pub gen: Option<String>,
    pub algorithm: Option<OneOrMany>,
    pub p0: Option<f64>,
    pub f1: Option<f64>,
    pub f2: Option<f64>,
    pub init_rule: Option<String>,
    pub f_rule: Option<String>,
    pub schedule: Option<String>,
    pub seed: Option<u64>,
    pub max_rounds: Option<u64>,
    pub trials: Option<u32>,
    pub format: Option<String>,
    pub out: Option<String>,
    pub jobs: Option<usize>,
    pub transcript: Option<String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Fills every unset field from `base`.
    pub fn or(self, base: ConfigFile) -> ConfigFile {
        ConfigFile {
            preset: self.preset.or(base.preset),
            family: self.family.or(base.family),
            sweep: self.sweep.or(base.sweep),
            name: self.name.or(base.name),
            graph: self.graph.or(base.graph),
            gen: self.gen.or(base.gen),
            algorithm: self.algorithm.or(base.algorithm),
            p0: self.p0.or(base.p0),
            f1: self.f1.or(base.f1),
            f2: self.f2.or(base.f2),
            init_rule: self.init_rule.or(base.init_rule),
            f_rule: self.f_rule.or(base.f_rule),
            schedule: self.schedule.or(base.schedule),
            seed: self.seed.or(base.seed),
            max_rounds: self.max_rounds.or(base.max_rounds),
            trials: self.trials.or(base.trials),
            format: self.format.or(base.format),
            out: self.out.or(base.out),
            jobs: self.jobs.or(base.jobs),
            transcript: self.transcript.or(base.transcript),
        }
    }

    pub fn algorithm_args(&self) -> AlgorithmArgs {
        AlgorithmArgs {
            p0: self.p0,
            f1: self.f1,
            f2: self.f2,
            init_rule: self.init_rule.clone(),
            f_rule: self.f_rule.clone(),
            schedule: self.schedule.clone(),
        }
    }

    /// Builds an experiment: the preset (if any) with every explicitly set
    /// field layered on top. Without a preset, `family`, `sweep` and
    /// `algorithm` are required. A seed is always required.
    pub fn experiment(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = match &self.preset {
            Some(name) => preset(name)
                .ok_or_else(|| ConfigError::Invalid(format!("unknown preset {name:?}")))?,
            None => ExperimentConfig {
                name: "custom".into(),
                family: Family::Empty,
                sweep: vec![],
                algorithms: vec![],
                trials: 100,
                seed: 0,
                max_rounds: DEFAULT_MAX_ROUNDS,
            },
        };
        if let Some(name) = &self.name {
            cfg.name = name.clone();
        }
        match &self.family {
            Some(f) => cfg.family = parse_family(f)?,
            None if self.preset.is_none() => {
                return Err(ConfigError::Invalid("family is required".into()))
            }
            None => {}
        }
        match &self.sweep {
            Some(s) => cfg.sweep = s.clone(),
            None if self.preset.is_none() => {
                return Err(ConfigError::Invalid("sweep is required".into()))
            }
            None => {}
        }
        let args = self.algorithm_args();
        match &self.algorithm {
            Some(names) => {
                cfg.algorithms = names
                    .names()
                    .iter()
                    .map(|n| build_algorithm(n, &args))
                    .collect::<Result<_, _>>()?;
            }
            None if self.preset.is_none() => {
                return Err(ConfigError::Invalid("algorithm is required".into()))
            }
            // Probability overrides still apply to the preset's algorithms.
            None if args != AlgorithmArgs::default() => {
                cfg.algorithms = cfg
                    .algorithms
                    .iter()
                    .map(|a| build_algorithm(a.name(), &args))
                    .collect::<Result<_, _>>()?;
            }
            None => {}
        }
        cfg.seed = self
            .seed
            .ok_or_else(|| ConfigError::Invalid("experiments need an explicit seed".into()))?;
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(m) = self.max_rounds {
            cfg.max_rounds = m;
        }
        cfg.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }
}

pub fn parse_family(s: &str) -> Result<Family, ConfigError> {
    let bad = || ConfigError::Invalid(format!("unknown family {s:?}"));
    Ok(match s.trim() {
        "cliques" => Family::Cliques,
        "complete" => Family::Complete,
        "ring" => Family::Ring,
        "path" => Family::Path,
        "empty" => Family::Empty,
        other => {
            let p = other.strip_prefix("gnp:").ok_or_else(bad)?;
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            if !(0.0..=1.0).contains(&p) {
                return Err(bad());
            }
            Family::Gnp { p }
        }
    })
}
