//! Ground-truth checks and closed-form oracles.
//!
//! Everything here works from a [`Graph`] and a claimed outcome only, never
//! from engine internals, so it can catch engine bugs.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{run, AlgorithmConfig, Outcome};
use crate::graph::{gen_complete, Graph};
use crate::mis::Schedule;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("node {node} is out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("colouring has {got} entries but the graph has {n} nodes")]
    LengthMismatch { got: usize, n: usize },
    #[error("node {0} has no colour")]
    Uncoloured(usize),
    #[error("order is not a permutation of the nodes")]
    NotPermutation,
    #[error("change factors need 1 < f1 <= f2")]
    InvalidFactors,
}

/// A per-node colour assignment, possibly partial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    colors: Vec<Option<u32>>,
}

impl Coloring {
    pub fn new(colors: Vec<Option<u32>>) -> Self {
        Self { colors }
    }

    pub fn from_total(colors: Vec<u32>) -> Self {
        Self {
            colors: colors.into_iter().map(Some).collect(),
        }
    }

    pub fn is_total(&self) -> bool {
        self.colors.iter().all(Option::is_some)
    }

    pub fn color(&self, v: usize) -> Option<u32> {
        self.colors[v]
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn max_color(&self) -> u32 {
        self.colors.iter().flatten().copied().max().unwrap_or(0)
    }

    fn total(&self, g: &Graph) -> Result<Vec<u32>, VerifyError> {
        if self.colors.len() != g.node_count() {
            return Err(VerifyError::LengthMismatch {
                got: self.colors.len(),
                n: g.node_count(),
            });
        }
        self.colors
            .iter()
            .enumerate()
            .map(|(v, c)| c.ok_or(VerifyError::Uncoloured(v)))
            .collect()
    }
}

/// Why a colouring is not Grundy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    /// Colours start at 1.
    ZeroColor {
        node: usize,
    },
    Monochromatic {
        u: usize,
        v: usize,
        color: u32,
    },
    /// `node` has colour `color` but no neighbour coloured `missing < color`.
    MissingSmaller {
        node: usize,
        color: u32,
        missing: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ZeroColor { node } => write!(f, "node {node} has colour 0"),
            Violation::Monochromatic { u, v, color } => {
                write!(f, "edge {u}-{v} has both ends coloured {color}")
            }
            Violation::MissingSmaller {
                node,
                color,
                missing,
            } => {
                write!(
                    f,
                    "node {node} has colour {color} but no neighbour with colour {missing}"
                )
            }
        }
    }
}

fn check_nodes(g: &Graph, s: &[usize]) -> Result<Vec<bool>, VerifyError> {
    let n = g.node_count();
    let mut member = vec![false; n];
    for &v in s {
        if v >= n {
            return Err(VerifyError::NodeOutOfRange { node: v, n });
        }
        member[v] = true;
    }
    Ok(member)
}

pub fn is_independent(g: &Graph, s: &[usize]) -> Result<bool, VerifyError> {
    let member = check_nodes(g, s)?;
    Ok(g.edges().all(|(u, v)| !(member[u] && member[v])))
}

/// Independent, and every node outside `s` has a neighbour in `s`.
pub fn is_maximal_independent(g: &Graph, s: &[usize]) -> Result<bool, VerifyError> {
    let member = check_nodes(g, s)?;
    let independent = g.edges().all(|(u, v)| !(member[u] && member[v]));
    Ok(independent
        && (0..g.node_count()).all(|v| member[v] || g.neighbors(v).iter().any(|&u| member[u])))
}

pub fn is_proper_coloring(g: &Graph, c: &Coloring) -> Result<bool, VerifyError> {
    let colors = c.total(g)?;
    Ok(g.edges().all(|(u, v)| colors[u] != colors[v]))
}

/// First reason `c` is not a Grundy colouring, or `None` if it is one.
pub fn grundy_violation(g: &Graph, c: &Coloring) -> Result<Option<Violation>, VerifyError> {
    let colors = c.total(g)?;
    if let Some(node) = colors.iter().position(|&k| k == 0) {
        return Ok(Some(Violation::ZeroColor { node }));
    }
    if let Some((u, v)) = g.edges().find(|&(u, v)| colors[u] == colors[v]) {
        return Ok(Some(Violation::Monochromatic {
            u,
            v,
            color: colors[u],
        }));
    }
    for v in 0..g.node_count() {
        let k = colors[v];
        let mut seen = vec![false; k as usize];
        for &u in g.neighbors(v) {
            if colors[u] < k {
                seen[colors[u] as usize] = true;
            }
        }
        if let Some(missing) = (1..k).find(|&j| !seen[j as usize]) {
            return Ok(Some(Violation::MissingSmaller {
                node: v,
                color: k,
                missing,
            }));
        }
    }
    Ok(None)
}

/// Proper, and no node could be recoloured with a smaller colour.
pub fn is_grundy_coloring(g: &Graph, c: &Coloring) -> Result<bool, VerifyError> {
    grundy_violation(g, c).map(|v| v.is_none())
}

/// Sequential greedy colouring visiting nodes in `order`.
pub fn reference_greedy(g: &Graph, order: &[usize]) -> Result<Coloring, VerifyError> {
    let n = g.node_count();
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(VerifyError::NotPermutation);
    }
    for &v in order {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(VerifyError::NotPermutation);
        }
    }
    let mut colors: Vec<Option<u32>> = vec![None; n];
    for &v in order {
        let mut taken: Vec<u32> = g.neighbors(v).iter().filter_map(|&u| colors[u]).collect();
        taken.sort_unstable();
        taken.dedup();
        let c = taken
            .iter()
            .zip(1..)
            .find(|(&t, want)| t != *want)
            .map_or(taken.len() as u32 + 1, |(_, w)| w);
        colors[v] = Some(c);
    }
    Ok(Coloring::new(colors))
}

/// Probability that exactly one of `d` independent beepers with probability
/// `p` beeps: `d p (1-p)^(d-1)`.
pub fn exactly_one_beep_prob(d: u32, p: f64) -> f64 {
    assert!(
        d >= 1 && (0.0..=1.0).contains(&p),
        "need d >= 1 and p in [0, 1]"
    );
    f64::from(d) * p * (1.0 - p).powi(d as i32 - 1)
}

/// Upper bound on the expected number of first-exchange beeps per node under
/// the feedback rule with factors in `[f1, f2]`:
/// `1 + f1/(f1-1) + ceil(log f2 / log f1)^2 * f2`.
pub fn expected_beep_bound(f1: f64, f2: f64) -> Result<f64, VerifyError> {
    if !(f1 > 1.0 && f1 <= f2 && f2.is_finite()) {
        return Err(VerifyError::InvalidFactors);
    }
    // Guard the ceiling against ln(f2)/ln(f1) landing a hair above an integer.
    let r = (f2.ln() / f1.ln() - 1e-12).ceil();
    Ok(1.0 + f1 / (f1 - 1.0) + r * r * f2)
}

/// Monte Carlo estimate of the one-round success probability on `K_d` under a
/// constant global probability `p`: the number of single-round runs, out of
/// `trials`, in which some node joined the MIS.
pub fn single_round_successes(d: usize, p: f64, trials: u64, seed: u64) -> u64 {
    let g = gen_complete(d).expect("d >= 1");
    let algo = AlgorithmConfig::MisGlobal {
        schedule: Schedule::Constant { p },
    };
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .filter(|_| {
            let r = run(&g, &algo, seeds.random(), 1);
            matches!(r.outcome, Outcome::Mis { ref members, .. } if !members.is_empty())
        })
        .count() as u64
}

/// Reads an outcome file: either a bare outcome object
/// (`{"kind": "mis", "members": [...]}` or `{"kind": "coloring", "colors": [...]}`)
/// or a full run report carrying one under `"outcome"`.
pub fn parse_outcome_json(text: &str) -> Result<Outcome, serde_json::Error> {
    let mut value: serde_json::Value = serde_json::from_str(text)?;
    if let Some(inner) = value.get_mut("outcome") {
        value = inner.take();
    }
    serde_json::from_value(value)
}

/// Verdict for a claimed outcome on a graph, with a human-readable reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub pass: bool,
    pub reason: String,
}

/// Full check used by the harness and CLI: MIS outcomes must be maximal
/// independent sets, colourings must be Grundy with at most Δ+1 colours.
pub fn check_outcome(g: &Graph, outcome: &Outcome) -> Result<Verdict, VerifyError> {
    match outcome {
        Outcome::Mis { members, undecided } => {
            if !undecided.is_empty() {
                return Ok(Verdict {
                    pass: false,
                    reason: format!("{} nodes undecided", undecided.len()),
                });
            }
            if !is_independent(g, members)? {
                return Ok(Verdict {
                    pass: false,
                    reason: "set is not independent".into(),
                });
            }
            if !is_maximal_independent(g, members)? {
                let v = (0..g.node_count())
                    .find(|&v| {
                        !members.contains(&v) && !g.neighbors(v).iter().any(|u| members.contains(u))
                    })
                    .unwrap_or(0);
                return Ok(Verdict {
                    pass: false,
                    reason: format!("not maximal: node {v} could be added"),
                });
            }
            Ok(Verdict {
                pass: true,
                reason: format!("maximal independent set of size {}", members.len()),
            })
        }
        Outcome::Coloring { colors } => {
            let c = Coloring::new(colors.clone());
            if let Some(violation) = grundy_violation(g, &c)? {
                return Ok(Verdict {
                    pass: false,
                    reason: violation.to_string(),
                });
            }
            let bound = g.max_degree() + 1;
            if c.max_color() as usize > bound {
                return Ok(Verdict {
                    pass: false,
                    reason: format!(
                        "uses colour {} above max degree + 1 = {bound}",
                        c.max_color()
                    ),
                });
            }
            Ok(Verdict {
                pass: true,
                reason: format!("Grundy colouring with {} colours", c.max_color()),
            })
        }
    }
}
