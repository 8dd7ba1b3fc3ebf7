//! Node-local MIS selection: the feedback rule and the global-schedule baseline.
//!
//! A round is two exchanges. In the first a node beeps with its current
//! probability and learns only whether some neighbour beeped too; in the
//! second a node that beeped unopposed announces that it joined, and any
//! node hearing such an announcement drops out.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::MisObservation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("p0 must lie in (0, 1], got {0}")]
    InitialProbability(f64),
    #[error("change factors need 1 < f1 <= f2, got f1 = {f1}, f2 = {f2}")]
    Factors { f1: f64, f2: f64 },
    #[error("invalid schedule: {0}")]
    Schedule(String),
}

/// How each node picks its starting probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitRule {
    /// Every node starts at `p0`.
    #[default]
    Fixed,
    /// Uniform on `[p0, 1]`, one draw per node before the first round.
    Uniform,
}

/// How the change factor `f` is chosen each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorRule {
    /// Always `f1`.
    #[default]
    Fixed,
    /// Uniform on `[f1, f2]`, drawn per node per round after the beep draw.
    Uniform,
}

/// Probability parameters shared by the feedback MIS and colouring rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MisParams {
    pub p0: f64,
    pub f1: f64,
    pub f2: f64,
    #[serde(default)]
    pub init_rule: InitRule,
    #[serde(default)]
    pub f_rule: FactorRule,
}

impl Default for MisParams {
    /// Start at 1/2, halve on a collision, double otherwise.
    fn default() -> Self {
        Self {
            p0: 0.5,
            f1: 2.0,
            f2: 2.0,
            init_rule: InitRule::Fixed,
            f_rule: FactorRule::Fixed,
        }
    }
}

impl MisParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        if !(self.p0 > 0.0 && self.p0 <= 1.0) {
            return Err(ParamError::InitialProbability(self.p0));
        }
        if !(self.f1 > 1.0 && self.f1 <= self.f2 && self.f2.is_finite()) {
            return Err(ParamError::Factors {
                f1: self.f1,
                f2: self.f2,
            });
        }
        Ok(())
    }

    pub fn initial_probability<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.init_rule {
            InitRule::Fixed => self.p0,
            InitRule::Uniform => self.p0 + (1.0 - self.p0) * rng.random::<f64>(),
        }
    }

    pub fn draw_factor<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.f_rule {
            FactorRule::Fixed => self.f1,
            FactorRule::Uniform => self.f1 + (self.f2 - self.f1) * rng.random::<f64>(),
        }
    }
}

/// Global probability sequence `p_1, p_2, ...` followed by every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Schedule {
    Constant {
        p: f64,
    },
    /// Explicit values; the last one repeats forever.
    Sequence {
        values: Vec<f64>,
    },
    /// `start * ratio^k` at level `k = (t - 1) / hold`, clamped to `cap`.
    /// With `cycle` the ramp restarts at `start` after the level that hits
    /// `cap`; without it `cap` repeats forever.
    Ramp {
        start: f64,
        ratio: f64,
        hold: u32,
        cap: f64,
        cycle: bool,
    },
    /// Size-aware cyclic ramp from `1/n` up to 1/2, growing by a constant
    /// factor each round so that `p` doubles every `hold_factor * log2 n`
    /// rounds.
    Sweep {
        hold_factor: f64,
    },
}

impl Schedule {
    pub fn validate(&self) -> Result<(), ParamError> {
        let unit = |p: f64| p > 0.0 && p <= 1.0;
        let ok = match self {
            Schedule::Constant { p } => unit(*p),
            Schedule::Sequence { values } => !values.is_empty() && values.iter().all(|&p| unit(p)),
            Schedule::Ramp {
                start,
                ratio,
                hold,
                cap,
                ..
            } => {
                unit(*start)
                    && unit(*cap)
                    && start <= cap
                    && *ratio >= 1.0
                    && ratio.is_finite()
                    && *hold >= 1
            }
            Schedule::Sweep { hold_factor } => *hold_factor > 0.0 && hold_factor.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(ParamError::Schedule(format!("{self:?}")))
        }
    }

    /// Replaces size-aware variants with the concrete schedule for an
    /// `n`-node graph.
    pub fn resolve(&self, n: usize) -> Schedule {
        match self {
            Schedule::Sweep { hold_factor } => {
                let log_n = (n.max(2) as f64).log2();
                Schedule::Ramp {
                    start: (1.0 / n.max(1) as f64).min(0.5),
                    ratio: 2f64.powf(1.0 / (hold_factor * log_n)),
                    hold: 1,
                    cap: 0.5,
                    cycle: true,
                }
            }
            other => other.clone(),
        }
    }

    /// `p_t` for round `t >= 1`. Size-aware variants must be resolved first.
    pub fn probability(&self, t: u64) -> f64 {
        debug_assert!(t >= 1);
        match self {
            Schedule::Constant { p } => *p,
            Schedule::Sequence { values } => {
                let i = usize::try_from(t - 1)
                    .unwrap_or(usize::MAX)
                    .min(values.len() - 1);
                values[i]
            }
            Schedule::Ramp {
                start,
                ratio,
                hold,
                cap,
                cycle,
            } => {
                let mut level = (t - 1) / u64::from(*hold);
                if *ratio > 1.0 {
                    // First level whose value reaches the cap.
                    let top = ((cap / start).ln() / ratio.ln() - 1e-9).ceil().max(0.0) as u64;
                    level = if *cycle {
                        level % (top + 1)
                    } else {
                        level.min(top)
                    };
                } else {
                    level = 0;
                }
                (start * ratio.powf(level as f64)).min(*cap)
            }
            Schedule::Sweep { .. } => panic!("size-aware schedule used without resolve()"),
        }
    }
}

/// Per-node state for MIS selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeMisState {
    pub p: f64,
    pub trying: bool,
    pub active: bool,
    pub in_mis: bool,
}

/// What a node did during one scripted round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MisActions {
    pub beeped: bool,
    pub announced: bool,
}

impl NodeMisState {
    pub fn new(p: f64) -> Self {
        Self {
            p,
            trying: false,
            active: true,
            in_mis: false,
        }
    }

    /// First exchange, send half: beep with probability `p`.
    pub fn first_send<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        if rng.random::<f64>() < self.p {
            self.trying = true;
        }
        self.trying
    }

    /// First exchange, receive half. `factor` is `None` for the global
    /// schedule, where `p` ignores feedback.
    pub fn first_receive(&mut self, obs: MisObservation, factor: Option<f64>) {
        if obs.heard_beep {
            self.trying = false;
            if let Some(f) = factor {
                self.p /= f;
            }
        } else if let Some(f) = factor {
            self.p = (f * self.p).min(1.0);
        }
    }

    /// Second exchange, send half: an unopposed beeper joins and announces.
    pub fn second_send(&mut self) -> bool {
        if self.trying {
            self.in_mis = true;
            self.active = false;
        }
        self.trying
    }

    /// Second exchange, receive half: a neighbour joined, so this node is out.
    pub fn second_receive(&mut self, obs: MisObservation) {
        if self.active && obs.heard_beep {
            self.active = false;
        }
    }
}

/// One full round of the feedback rule against scripted observations.
pub fn feedback_mis_round<R: Rng + ?Sized>(
    state: &mut NodeMisState,
    params: &MisParams,
    obs1: MisObservation,
    obs2: MisObservation,
    rng: &mut R,
) -> MisActions {
    debug_assert!(state.active);
    let beeped = state.first_send(rng);
    let f = params.draw_factor(rng);
    state.first_receive(obs1, Some(f));
    let announced = state.second_send();
    state.second_receive(obs2);
    MisActions { beeped, announced }
}

/// One full round of the global-schedule rule for round `t`.
pub fn global_mis_round<R: Rng + ?Sized>(
    state: &mut NodeMisState,
    schedule: &Schedule,
    t: u64,
    obs1: MisObservation,
    obs2: MisObservation,
    rng: &mut R,
) -> MisActions {
    debug_assert!(state.active);
    state.p = schedule.probability(t);
    let beeped = state.first_send(rng);
    state.first_receive(obs1, None);
    let announced = state.second_send();
    state.second_receive(obs2);
    MisActions { beeped, announced }
}
