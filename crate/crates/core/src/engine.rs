//! Lockstep simulation of two-exchange rounds in the beeping model.
//!
//! Every exchange is split into a send phase, in which each active node
//! decides from its own state and private random stream, and a deliver phase,
//! in which each node receives an observation built from its neighbours'
//! sends. Node logic only ever sees [`MisObservation`] or
//! [`ColorObservation`]: whether anyone signalled, never who or how many.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coloring::NodeColorState;
use crate::graph::Graph;
use crate::mis::{MisParams, NodeMisState, ParamError, Schedule};

pub const DEFAULT_MAX_ROUNDS: u64 = 10_000;

/// Which half of a round is executing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundPhase {
    FirstExchange,
    SecondExchange,
}

/// What a node learns from one MIS exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MisObservation {
    pub heard_beep: bool,
}

impl FromIterator<()> for MisObservation {
    fn from_iter<I: IntoIterator<Item = ()>>(iter: I) -> Self {
        Self {
            heard_beep: iter.into_iter().next().is_some(),
        }
    }
}

/// What a node learns from one colouring exchange: the set of colours sent
/// by at least one neighbour.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ColorObservation {
    pub colors_heard: BTreeSet<u32>,
}

impl FromIterator<u32> for ColorObservation {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        Self {
            colors_heard: iter.into_iter().collect(),
        }
    }
}

/// 64-bit finaliser from SplitMix64.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a path of indices.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(mix64(master), |acc, &i| mix64(acc ^ mix64(i)))
}

/// Per-node random streams.
///
/// Node `v` draws from a ChaCha8 stream seeded with `derive_seed(master, [v])`.
/// Each round an active node takes, in order: one uniform for its send
/// decision, then one uniform for `f` when the factor rule is random. A
/// random initial probability is drawn once before round 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngPolicy {
    pub master_seed: u64,
}

impl RngPolicy {
    pub fn node_rng(&self, v: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(derive_seed(self.master_seed, &[v as u64]))
    }
}

/// Which algorithm every node runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum AlgorithmConfig {
    MisFeedback {
        #[serde(flatten)]
        params: MisParams,
    },
    MisGlobal {
        schedule: Schedule,
    },
    ColoringFeedback {
        #[serde(flatten)]
        params: MisParams,
    },
}

impl AlgorithmConfig {
    pub fn validate(&self) -> Result<(), ParamError> {
        match self {
            Self::MisFeedback { params } | Self::ColoringFeedback { params } => params.validate(),
            Self::MisGlobal { schedule } => schedule.validate(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::MisFeedback { .. } => "mis-feedback",
            Self::MisGlobal { .. } => "mis-global",
            Self::ColoringFeedback { .. } => "coloring-feedback",
        }
    }

    pub fn is_coloring(&self) -> bool {
        matches!(self, Self::ColoringFeedback { .. })
    }
}

/// Per-node result of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    /// MIS members in increasing order; `undecided` lists nodes still active
    /// when the round cap was hit.
    Mis {
        members: Vec<usize>,
        #[serde(default)]
        undecided: Vec<usize>,
    },
    /// Colour per node, `None` for nodes still active at the cap.
    Coloring { colors: Vec<Option<u32>> },
}

/// One signal in a transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalEvent {
    pub node: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<u32>,
}

/// Transcript line: who signalled in each exchange of one round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u64,
    pub first: Vec<SignalEvent>,
    pub second: Vec<SignalEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub algorithm: String,
    pub outcome: Outcome,
    pub rounds_used: u64,
    pub time_steps: u64,
    pub beeps_per_node: Vec<u32>,
    pub second_exchange_signals_per_node: Vec<u32>,
    pub terminated: bool,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript: Option<Vec<RoundRecord>>,
}

impl RunResult {
    pub fn mean_beeps(&self) -> f64 {
        if self.beeps_per_node.is_empty() {
            return 0.0;
        }
        self.beeps_per_node
            .iter()
            .map(|&b| f64::from(b))
            .sum::<f64>()
            / self.beeps_per_node.len() as f64
    }

    /// Transcript as line-delimited JSON, one round per line.
    pub fn transcript_jsonl(&self) -> Option<String> {
        self.transcript.as_ref().map(|rounds| {
            rounds
                .iter()
                .map(|r| serde_json::to_string(r).expect("transcript records serialise") + "\n")
                .collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub max_rounds: u64,
    pub record_transcript: bool,
    /// Order in which the engine visits nodes within a phase. Results do not
    /// depend on it; tests permute it to check that.
    pub visit_order: Option<Vec<usize>>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_rounds: DEFAULT_MAX_ROUNDS,
            record_transcript: false,
            visit_order: None,
        }
    }
}

/// Node logic as seen by the engine.
pub trait Protocol {
    type Node: Clone;
    type Signal: Copy;
    type Observation: FromIterator<Self::Signal>;

    fn init(&self, rng: &mut ChaCha8Rng) -> Self::Node;
    fn is_active(&self, node: &Self::Node) -> bool;
    fn first_send(
        &self,
        node: &mut Self::Node,
        round: u64,
        rng: &mut ChaCha8Rng,
    ) -> Option<Self::Signal>;
    fn first_receive(&self, node: &mut Self::Node, obs: Self::Observation, rng: &mut ChaCha8Rng);
    fn second_send(&self, node: &mut Self::Node) -> Option<Self::Signal>;
    fn second_receive(&self, node: &mut Self::Node, obs: Self::Observation);
    /// Probability that `node` sends in the coming first exchange; 0 if inactive.
    fn send_probability(&self, node: &Self::Node, round: u64) -> f64;
    fn signal_color(signal: Self::Signal) -> Option<u32>;
    fn outcome(&self, nodes: &[Self::Node]) -> Outcome;
}

pub struct FeedbackMis(pub MisParams);
pub struct GlobalMis(pub Schedule);
pub struct FeedbackColoring(pub MisParams);

fn mis_outcome(nodes: &[NodeMisState]) -> Outcome {
    Outcome::Mis {
        members: (0..nodes.len()).filter(|&v| nodes[v].in_mis).collect(),
        undecided: (0..nodes.len()).filter(|&v| nodes[v].active).collect(),
    }
}

impl Protocol for FeedbackMis {
    type Node = NodeMisState;
    type Signal = ();
    type Observation = MisObservation;

    fn init(&self, rng: &mut ChaCha8Rng) -> NodeMisState {
        NodeMisState::new(self.0.initial_probability(rng))
    }
    fn is_active(&self, node: &NodeMisState) -> bool {
        node.active
    }
    fn first_send(&self, node: &mut NodeMisState, _round: u64, rng: &mut ChaCha8Rng) -> Option<()> {
        node.first_send(rng).then_some(())
    }
    fn first_receive(&self, node: &mut NodeMisState, obs: MisObservation, rng: &mut ChaCha8Rng) {
        let f = self.0.draw_factor(rng);
        node.first_receive(obs, Some(f));
    }
    fn second_send(&self, node: &mut NodeMisState) -> Option<()> {
        node.second_send().then_some(())
    }
    fn second_receive(&self, node: &mut NodeMisState, obs: MisObservation) {
        node.second_receive(obs);
    }
    fn send_probability(&self, node: &NodeMisState, _round: u64) -> f64 {
        if node.active {
            node.p
        } else {
            0.0
        }
    }
    fn signal_color(_: ()) -> Option<u32> {
        None
    }
    fn outcome(&self, nodes: &[NodeMisState]) -> Outcome {
        mis_outcome(nodes)
    }
}

impl Protocol for GlobalMis {
    type Node = NodeMisState;
    type Signal = ();
    type Observation = MisObservation;

    fn init(&self, _rng: &mut ChaCha8Rng) -> NodeMisState {
        NodeMisState::new(self.0.probability(1))
    }
    fn is_active(&self, node: &NodeMisState) -> bool {
        node.active
    }
    fn first_send(&self, node: &mut NodeMisState, round: u64, rng: &mut ChaCha8Rng) -> Option<()> {
        node.p = self.0.probability(round);
        node.first_send(rng).then_some(())
    }
    fn first_receive(&self, node: &mut NodeMisState, obs: MisObservation, _rng: &mut ChaCha8Rng) {
        node.first_receive(obs, None);
    }
    fn second_send(&self, node: &mut NodeMisState) -> Option<()> {
        node.second_send().then_some(())
    }
    fn second_receive(&self, node: &mut NodeMisState, obs: MisObservation) {
        node.second_receive(obs);
    }
    fn send_probability(&self, node: &NodeMisState, round: u64) -> f64 {
        if node.active {
            self.0.probability(round)
        } else {
            0.0
        }
    }
    fn signal_color(_: ()) -> Option<u32> {
        None
    }
    fn outcome(&self, nodes: &[NodeMisState]) -> Outcome {
        mis_outcome(nodes)
    }
}

impl Protocol for FeedbackColoring {
    type Node = NodeColorState;
    type Signal = u32;
    type Observation = ColorObservation;

    fn init(&self, rng: &mut ChaCha8Rng) -> NodeColorState {
        NodeColorState::new(self.0.initial_probability(rng))
    }
    fn is_active(&self, node: &NodeColorState) -> bool {
        node.active
    }
    fn first_send(
        &self,
        node: &mut NodeColorState,
        _round: u64,
        rng: &mut ChaCha8Rng,
    ) -> Option<u32> {
        node.first_send(rng)
    }
    fn first_receive(
        &self,
        node: &mut NodeColorState,
        obs: ColorObservation,
        rng: &mut ChaCha8Rng,
    ) {
        let f = self.0.draw_factor(rng);
        node.first_receive(&obs, f);
    }
    fn second_send(&self, node: &mut NodeColorState) -> Option<u32> {
        node.second_send()
    }
    fn second_receive(&self, node: &mut NodeColorState, obs: ColorObservation) {
        node.second_receive(&obs);
    }
    fn send_probability(&self, node: &NodeColorState, _round: u64) -> f64 {
        if node.active {
            node.p
        } else {
            0.0
        }
    }
    fn signal_color(c: u32) -> Option<u32> {
        Some(c)
    }
    fn outcome(&self, nodes: &[NodeColorState]) -> Outcome {
        Outcome::Coloring {
            colors: nodes.iter().map(|n| n.assigned).collect(),
        }
    }
}

/// Builds the observation node `v` receives given every node's send for
/// this exchange. Only sends from neighbours count; the result carries
/// presence, never multiplicity or identity.
pub fn observe<P: Protocol>(graph: &Graph, v: usize, sent: &[Option<P::Signal>]) -> P::Observation {
    graph.neighbors(v).iter().filter_map(|&u| sent[u]).collect()
}

/// A run in progress. Exposes per-round stepping for instrumentation.
pub struct Simulation<'g, P: Protocol> {
    graph: &'g Graph,
    protocol: P,
    nodes: Vec<P::Node>,
    rngs: Vec<ChaCha8Rng>,
    order: Vec<usize>,
    round: u64,
    beeps: Vec<u32>,
    second_signals: Vec<u32>,
    transcript: Option<Vec<RoundRecord>>,
    seed: u64,
    sent: Vec<Option<P::Signal>>,
}

impl<'g, P: Protocol> Simulation<'g, P> {
    pub fn new(graph: &'g Graph, protocol: P, master_seed: u64, options: &RunOptions) -> Self {
        let n = graph.node_count();
        let policy = RngPolicy { master_seed };
        let mut rngs: Vec<ChaCha8Rng> = (0..n).map(|v| policy.node_rng(v)).collect();
        let nodes = rngs.iter_mut().map(|rng| protocol.init(rng)).collect();
        let order = match &options.visit_order {
            Some(order) => {
                let mut check = order.clone();
                check.sort_unstable();
                assert!(
                    check.iter().copied().eq(0..n),
                    "visit order must be a permutation of 0..n"
                );
                order.clone()
            }
            None => (0..n).collect(),
        };
        Self {
            graph,
            protocol,
            nodes,
            rngs,
            order,
            round: 0,
            beeps: vec![0; n],
            second_signals: vec![0; n],
            transcript: options.record_transcript.then(Vec::new),
            seed: master_seed,
            sent: vec![None; n],
        }
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn nodes(&self) -> &[P::Node] {
        &self.nodes
    }

    pub fn all_inactive(&self) -> bool {
        self.nodes.iter().all(|n| !self.protocol.is_active(n))
    }

    /// Weight of `v`'s neighbourhood for the coming round: the sum of the
    /// send probabilities of its active neighbours.
    pub fn neighborhood_weight(&self, v: usize) -> f64 {
        let next = self.round + 1;
        self.graph
            .neighbors(v)
            .iter()
            .map(|&u| self.protocol.send_probability(&self.nodes[u], next))
            .sum()
    }

    /// Executes one round (both exchanges).
    pub fn step(&mut self) {
        self.round += 1;
        let round = self.round;
        let mut record = self.transcript.is_some().then(|| RoundRecord {
            round,
            first: vec![],
            second: vec![],
        });

        // First exchange: every send is fixed before anything is delivered.
        for &v in &self.order {
            self.sent[v] = if self.protocol.is_active(&self.nodes[v]) {
                self.protocol
                    .first_send(&mut self.nodes[v], round, &mut self.rngs[v])
            } else {
                None
            };
        }
        for &v in &self.order {
            if self.protocol.is_active(&self.nodes[v]) {
                let obs = observe::<P>(self.graph, v, &self.sent);
                self.protocol
                    .first_receive(&mut self.nodes[v], obs, &mut self.rngs[v]);
            }
        }
        self.tally(RoundPhase::FirstExchange, record.as_mut());

        // Second exchange.
        for &v in &self.order {
            self.sent[v] = if self.protocol.is_active(&self.nodes[v]) {
                self.protocol.second_send(&mut self.nodes[v])
            } else {
                None
            };
        }
        for &v in &self.order {
            if self.protocol.is_active(&self.nodes[v]) {
                let obs = observe::<P>(self.graph, v, &self.sent);
                self.protocol.second_receive(&mut self.nodes[v], obs);
            }
        }
        self.tally(RoundPhase::SecondExchange, record.as_mut());

        if let (Some(transcript), Some(record)) = (self.transcript.as_mut(), record) {
            transcript.push(record);
        }
    }

    fn tally(&mut self, phase: RoundPhase, record: Option<&mut RoundRecord>) {
        let counts = match phase {
            RoundPhase::FirstExchange => &mut self.beeps,
            RoundPhase::SecondExchange => &mut self.second_signals,
        };
        for (v, s) in self.sent.iter().enumerate() {
            if s.is_some() {
                counts[v] += 1;
            }
        }
        if let Some(record) = record {
            let events = self
                .sent
                .iter()
                .enumerate()
                .filter_map(|(node, s)| {
                    s.map(|s| SignalEvent {
                        node,
                        color: P::signal_color(s),
                    })
                })
                .collect();
            match phase {
                RoundPhase::FirstExchange => record.first = events,
                RoundPhase::SecondExchange => record.second = events,
            }
        }
    }

    /// Steps until every node is inactive or `max_rounds` rounds have run.
    pub fn run_to_end(mut self, max_rounds: u64, algorithm: &str) -> RunResult {
        while !self.all_inactive() && self.round < max_rounds {
            self.step();
        }
        let terminated = self.all_inactive();
        RunResult {
            algorithm: algorithm.to_string(),
            outcome: self.protocol.outcome(&self.nodes),
            rounds_used: self.round,
            time_steps: 2 * self.round,
            beeps_per_node: self.beeps,
            second_exchange_signals_per_node: self.second_signals,
            terminated,
            seed: self.seed,
            transcript: self.transcript,
        }
    }
}

/// Runs `algorithm` on `graph` with the default options and the given cap.
pub fn run(
    graph: &Graph,
    algorithm: &AlgorithmConfig,
    master_seed: u64,
    max_rounds: u64,
) -> RunResult {
    run_with(
        graph,
        algorithm,
        master_seed,
        &RunOptions {
            max_rounds,
            ..RunOptions::default()
        },
    )
}

pub fn run_with(
    graph: &Graph,
    algorithm: &AlgorithmConfig,
    master_seed: u64,
    options: &RunOptions,
) -> RunResult {
    assert!(options.max_rounds >= 1, "max_rounds must be at least 1");
    let name = algorithm.name();
    let cap = options.max_rounds;
    match algorithm {
        AlgorithmConfig::MisFeedback { params } => {
            Simulation::new(graph, FeedbackMis(*params), master_seed, options).run_to_end(cap, name)
        }
        AlgorithmConfig::MisGlobal { schedule } => {
            let schedule = schedule.resolve(graph.node_count());
            Simulation::new(graph, GlobalMis(schedule), master_seed, options).run_to_end(cap, name)
        }
        AlgorithmConfig::ColoringFeedback { params } => {
            Simulation::new(graph, FeedbackColoring(*params), master_seed, options)
                .run_to_end(cap, name)
        }
    }
}
