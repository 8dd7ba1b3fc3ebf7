//! Textual specs for generators, schedules and algorithms, as used on the
//! command line and in config files.
//!
//! ```text
//! graph:     gnp:N,P | complete:N | ring:N | path:N | cliques:M | empty:N
//! schedule:  const:P | seq:P1,P2,... | ramp:START,RATIO[,hold=H][,cap=C][,cycle] | sweep:H
//! algorithm: mis-feedback | mis-global | coloring-feedback
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::AlgorithmConfig;
use crate::graph::{self, Graph, GraphError};
use crate::mis::{FactorRule, InitRule, MisParams, Schedule};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid {what} {input:?}: {msg}")]
pub struct SpecError {
    pub what: &'static str,
    pub input: String,
    pub msg: String,
}

impl SpecError {
    fn new(what: &'static str, input: &str, msg: impl Into<String>) -> Self {
        Self {
            what,
            input: input.to_string(),
            msg: msg.into(),
        }
    }
}

/// A graph generator with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GraphSpec {
    Gnp { n: usize, p: f64 },
    Complete(usize),
    Ring(usize),
    Path(usize),
    Cliques(usize),
    Empty(usize),
}

impl GraphSpec {
    /// Builds the graph. Only `gnp` consumes the seed.
    pub fn build(&self, seed: u64) -> Result<Graph, GraphError> {
        match *self {
            GraphSpec::Gnp { n, p } => graph::gen_gnp(n, p, seed),
            GraphSpec::Complete(n) => graph::gen_complete(n),
            GraphSpec::Ring(n) => graph::gen_ring(n),
            GraphSpec::Path(n) => graph::gen_path(n),
            GraphSpec::Cliques(m) => graph::gen_clique_family(m),
            GraphSpec::Empty(n) => graph::gen_empty(n),
        }
    }

    pub fn is_random(&self) -> bool {
        matches!(self, GraphSpec::Gnp { .. })
    }
}

fn split_kind(s: &str) -> (&str, &str) {
    match s.split_once(':') {
        Some((k, rest)) => (k.trim(), rest.trim()),
        None => (s.trim(), ""),
    }
}

fn parse_num<T: FromStr>(what: &'static str, input: &str, field: &str) -> Result<T, SpecError> {
    field
        .trim()
        .parse()
        .map_err(|_| SpecError::new(what, input, format!("bad number {field:?}")))
}

fn parse_prob(what: &'static str, input: &str, field: &str) -> Result<f64, SpecError> {
    let p: f64 = parse_num(what, input, field)?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(SpecError::new(
            what,
            input,
            format!("probability {p} outside [0, 1]"),
        ))
    }
}

impl FromStr for GraphSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        const WHAT: &str = "graph spec";
        let (kind, rest) = split_kind(s);
        let args: Vec<&str> = if rest.is_empty() {
            vec![]
        } else {
            rest.split(',').collect()
        };
        let size = |min: usize| -> Result<usize, SpecError> {
            match args.as_slice() {
                [n] => {
                    let n: usize = parse_num(WHAT, s, n)?;
                    if n < min {
                        Err(SpecError::new(
                            WHAT,
                            s,
                            format!("size must be at least {min}"),
                        ))
                    } else {
                        Ok(n)
                    }
                }
                _ => Err(SpecError::new(
                    WHAT,
                    s,
                    "expected exactly one size argument",
                )),
            }
        };
        match kind {
            "gnp" => match args.as_slice() {
                [n, p] => {
                    let n: usize = parse_num(WHAT, s, n)?;
                    if n == 0 {
                        return Err(SpecError::new(WHAT, s, "size must be at least 1"));
                    }
                    Ok(GraphSpec::Gnp {
                        n,
                        p: parse_prob(WHAT, s, p)?,
                    })
                }
                _ => Err(SpecError::new(WHAT, s, "expected gnp:N,P")),
            },
            "complete" => size(1).map(GraphSpec::Complete),
            "ring" => size(3).map(GraphSpec::Ring),
            "path" => size(1).map(GraphSpec::Path),
            "cliques" => size(1).map(GraphSpec::Cliques),
            "empty" => size(1).map(GraphSpec::Empty),
            _ => Err(SpecError::new(WHAT, s, "unknown generator")),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Gnp { n, p } => write!(f, "gnp:{n},{p}"),
            GraphSpec::Complete(n) => write!(f, "complete:{n}"),
            GraphSpec::Ring(n) => write!(f, "ring:{n}"),
            GraphSpec::Path(n) => write!(f, "path:{n}"),
            GraphSpec::Cliques(m) => write!(f, "cliques:{m}"),
            GraphSpec::Empty(n) => write!(f, "empty:{n}"),
        }
    }
}

impl TryFrom<String> for GraphSpec {
    type Error = SpecError;
    fn try_from(s: String) -> Result<Self, SpecError> {
        s.parse()
    }
}

impl From<GraphSpec> for String {
    fn from(g: GraphSpec) -> String {
        g.to_string()
    }
}

pub fn parse_schedule(s: &str) -> Result<Schedule, SpecError> {
    const WHAT: &str = "schedule";
    let (kind, rest) = split_kind(s);
    let args: Vec<&str> = if rest.is_empty() {
        vec![]
    } else {
        rest.split(',').map(str::trim).collect()
    };
    let schedule = match (kind, args.as_slice()) {
        ("const", [p]) => Schedule::Constant {
            p: parse_num(WHAT, s, p)?,
        },
        ("seq", values) if !values.is_empty() => Schedule::Sequence {
            values: values
                .iter()
                .map(|v| parse_num(WHAT, s, v))
                .collect::<Result<_, _>>()?,
        },
        ("ramp", [start, ratio, opts @ ..]) => {
            let (mut hold, mut cap, mut cycle) = (1u32, 1.0f64, false);
            for opt in opts {
                match opt.split_once('=') {
                    Some(("hold", v)) => hold = parse_num(WHAT, s, v)?,
                    Some(("cap", v)) => cap = parse_num(WHAT, s, v)?,
                    None if *opt == "cycle" => cycle = true,
                    _ => {
                        return Err(SpecError::new(
                            WHAT,
                            s,
                            format!("unknown ramp option {opt:?}"),
                        ))
                    }
                }
            }
            Schedule::Ramp {
                start: parse_num(WHAT, s, start)?,
                ratio: parse_num(WHAT, s, ratio)?,
                hold,
                cap,
                cycle,
            }
        }
        ("sweep", [h]) => Schedule::Sweep {
            hold_factor: parse_num(WHAT, s, h)?,
        },
        _ => {
            return Err(SpecError::new(
                WHAT,
                s,
                "expected const:P, seq:P,..., ramp:START,RATIO[,...] or sweep:H",
            ))
        }
    };
    schedule
        .validate()
        .map_err(|e| SpecError::new(WHAT, s, e.to_string()))?;
    Ok(schedule)
}

/// Inverse of [`parse_schedule`].
pub fn format_schedule(schedule: &Schedule) -> String {
    match schedule {
        Schedule::Constant { p } => format!("const:{p}"),
        Schedule::Sequence { values } => {
            format!(
                "seq:{}",
                values
                    .iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            )
        }
        Schedule::Ramp {
            start,
            ratio,
            hold,
            cap,
            cycle,
        } => {
            format!(
                "ramp:{start},{ratio},hold={hold},cap={cap}{}",
                if *cycle { ",cycle" } else { "" }
            )
        }
        Schedule::Sweep { hold_factor } => format!("sweep:{hold_factor}"),
    }
}

/// Default schedule for `mis-global` when none is given.
pub const DEFAULT_SCHEDULE: &str = "sweep:1";

fn parse_rule<T>(what: &'static str, s: &str, fixed: T, uniform: T) -> Result<T, SpecError> {
    match s {
        "fixed" => Ok(fixed),
        "uniform" => Ok(uniform),
        _ => Err(SpecError::new(what, s, "expected fixed or uniform")),
    }
}

pub fn parse_init_rule(s: &str) -> Result<InitRule, SpecError> {
    parse_rule("init rule", s, InitRule::Fixed, InitRule::Uniform)
}

pub fn parse_factor_rule(s: &str) -> Result<FactorRule, SpecError> {
    parse_rule("factor rule", s, FactorRule::Fixed, FactorRule::Uniform)
}

/// Loose algorithm settings as they appear on the command line; unset
/// fields take the defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlgorithmArgs {
    pub p0: Option<f64>,
    pub f1: Option<f64>,
    pub f2: Option<f64>,
    pub init_rule: Option<String>,
    pub f_rule: Option<String>,
    pub schedule: Option<String>,
}

/// Assembles and validates an algorithm from its name and settings. When
/// only `f1` is given, `f2` follows it.
pub fn build_algorithm(name: &str, args: &AlgorithmArgs) -> Result<AlgorithmConfig, SpecError> {
    const WHAT: &str = "algorithm";
    let params = || -> Result<MisParams, SpecError> {
        let d = MisParams::default();
        let f1 = args.f1.unwrap_or(d.f1);
        let params = MisParams {
            p0: args.p0.unwrap_or(d.p0),
            f1,
            f2: args.f2.unwrap_or(if args.f1.is_some() { f1 } else { d.f2 }),
            init_rule: args
                .init_rule
                .as_deref()
                .map(parse_init_rule)
                .transpose()?
                .unwrap_or_default(),
            f_rule: args
                .f_rule
                .as_deref()
                .map(parse_factor_rule)
                .transpose()?
                .unwrap_or_default(),
        };
        params
            .validate()
            .map_err(|e| SpecError::new(WHAT, name, e.to_string()))?;
        Ok(params)
    };
    match name.trim() {
        "mis-feedback" => Ok(AlgorithmConfig::MisFeedback { params: params()? }),
        "coloring-feedback" => Ok(AlgorithmConfig::ColoringFeedback { params: params()? }),
        "mis-global" => Ok(AlgorithmConfig::MisGlobal {
            schedule: parse_schedule(args.schedule.as_deref().unwrap_or(DEFAULT_SCHEDULE))?,
        }),
        _ => Err(SpecError::new(
            WHAT,
            name,
            "expected mis-feedback, mis-global or coloring-feedback",
        )),
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn graph_specs() {
        assert_eq!("gnp:10,0.5".parse(), Ok(GraphSpec::Gnp { n: 10, p: 0.5 }));
        assert_eq!("complete:3".parse(), Ok(GraphSpec::Complete(3)));
        assert_eq!(" cliques: 2 ".parse(), Ok(GraphSpec::Cliques(2)));
        for bad in [
            "",
            "gnp:10",
            "gnp:10,2",
            "ring:2",
            "complete:0",
            "torus:3",
            "path:x",
            "empty:1,2",
        ] {
            assert!(bad.parse::<GraphSpec>().is_err(), "{bad}");
        }
        let g = "cliques:2".parse::<GraphSpec>().unwrap().build(0).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (6, 2));
    }

    #[test]
    fn schedules() {
        assert_eq!(
            parse_schedule("const:0.25"),
            Ok(Schedule::Constant { p: 0.25 })
        );
        assert_eq!(
            parse_schedule("seq:0.1,0.5"),
            Ok(Schedule::Sequence {
                values: vec![0.1, 0.5]
            })
        );
        assert_eq!(
            parse_schedule("ramp:0.01,2,hold=3,cap=0.5,cycle"),
            Ok(Schedule::Ramp {
                start: 0.01,
                ratio: 2.0,
                hold: 3,
                cap: 0.5,
                cycle: true
            })
        );
        assert_eq!(
            parse_schedule("ramp:0.1,1.5"),
            Ok(Schedule::Ramp {
                start: 0.1,
                ratio: 1.5,
                hold: 1,
                cap: 1.0,
                cycle: false
            })
        );
        assert_eq!(
            parse_schedule("sweep:2"),
            Ok(Schedule::Sweep { hold_factor: 2.0 })
        );
        for bad in [
            "const:0",
            "const:1.5",
            "seq:",
            "ramp:0.1",
            "ramp:0.1,2,hold=0",
            "ramp:0.1,2,x",
            "sweep:-1",
            "nope",
        ] {
            assert!(parse_schedule(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn algorithms() {
        let mis = build_algorithm("mis-feedback", &AlgorithmArgs::default()).unwrap();
        assert_eq!(
            mis,
            AlgorithmConfig::MisFeedback {
                params: MisParams::default()
            }
        );
        let args = AlgorithmArgs {
            f1: Some(3.0),
            ..Default::default()
        };
        let AlgorithmConfig::ColoringFeedback { params } =
            build_algorithm("coloring-feedback", &args).unwrap()
        else {
            panic!()
        };
        assert_eq!((params.f1, params.f2), (3.0, 3.0));
        let args = AlgorithmArgs {
            f1: Some(2.0),
            f2: Some(1.5),
            ..Default::default()
        };
        assert!(build_algorithm("mis-feedback", &args).is_err());
        let global = build_algorithm("mis-global", &AlgorithmArgs::default()).unwrap();
        assert_eq!(
            global,
            AlgorithmConfig::MisGlobal {
                schedule: Schedule::Sweep { hold_factor: 1.0 }
            }
        );
        assert!(build_algorithm("luby", &AlgorithmArgs::default()).is_err());
        let args = AlgorithmArgs {
            f_rule: Some("random".into()),
            ..Default::default()
        };
        assert!(build_algorithm("mis-feedback", &args).is_err());
    }

    proptest! {
        #[test]
        fn schedule_format_round_trips(start in 0.001f64..=1.0, ratio in 1.0f64..4.0, hold in 1u32..50, cycle in any::<bool>()) {
            let s = Schedule::Ramp { start, ratio, hold, cap: 1.0, cycle };
            prop_assert_eq!(parse_schedule(&format_schedule(&s)), Ok(s));
        }

        #[test]
        fn graph_spec_display_round_trips(n in 3usize..10_000, p in 0.0f64..=1.0, kind in 0u8..6) {
            let spec = match kind {
                0 => GraphSpec::Gnp { n, p },
                1 => GraphSpec::Complete(n),
                2 => GraphSpec::Ring(n),
                3 => GraphSpec::Path(n),
                4 => GraphSpec::Cliques(n),
                _ => GraphSpec::Empty(n),
            };
            prop_assert_eq!(spec.to_string().parse::<GraphSpec>(), Ok(spec));
        }

        #[test]
        fn parsers_never_panic(s in ".{0,40}") {
            let _ = s.parse::<GraphSpec>();
            let _ = parse_schedule(&s);
            let _ = build_algorithm(&s, &AlgorithmArgs::default());
        }
    }
}
