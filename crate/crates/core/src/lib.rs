//! Simulator for anonymous distributed algorithms in the beeping model with
//! collision detection.
//!
//! * [`graph`]: graphs, generators and the edge-list format.
//! * [`engine`]: lockstep two-exchange rounds with restricted observations.
//! * [`mis`] and [`coloring`]: node logic for feedback MIS selection, the
//!   global-schedule baseline and distributed greedy colouring.
//! * [`verify`]: independent checkers and closed-form oracles.
//! * [`experiments`]: multi-trial harness, scaling fits and presets.
//! * [`parse`] and [`config`]: textual specs and config files.

pub mod coloring;
pub mod config;
pub mod engine;
pub mod experiments;
pub mod graph;
pub mod mis;
pub mod parse;
pub mod verify;

pub use engine::{run, run_with, AlgorithmConfig, Outcome, RunOptions, RunResult};
pub use graph::Graph;
pub use mis::{MisParams, Schedule};
