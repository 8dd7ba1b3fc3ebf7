//! Node-local distributed greedy colouring.
//!
//! Same probability feedback as MIS selection, but a node competes for a
//! specific colour: the smallest one not yet taken by a neighbour. It only
//! backs off when a neighbour sends that same colour.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::ColorObservation;
use crate::mis::MisParams;

/// Smallest positive colour not in `forbidden`.
pub fn smallest_available(forbidden: &BTreeSet<u32>) -> u32 {
    // Colours are dense from 1, so the first gap in sorted order is the answer.
    let mut c = 1;
    for &f in forbidden.range(1..) {
        if f != c {
            break;
        }
        c += 1;
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeColorState {
    pub p: f64,
    pub trying: bool,
    pub forbidden: BTreeSet<u32>,
    pub active: bool,
    pub assigned: Option<u32>,
    /// Candidate colour for the current round.
    pub candidate: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ColorActions {
    pub sent: Option<u32>,
    pub announced: Option<u32>,
}

impl NodeColorState {
    pub fn new(p: f64) -> Self {
        Self {
            p,
            trying: false,
            forbidden: BTreeSet::new(),
            active: true,
            assigned: None,
            candidate: 1,
        }
    }

    pub fn first_send<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<u32> {
        self.candidate = smallest_available(&self.forbidden);
        if rng.random::<f64>() < self.p {
            self.trying = true;
            Some(self.candidate)
        } else {
            None
        }
    }

    pub fn first_receive(&mut self, obs: &ColorObservation, f: f64) {
        if obs.colors_heard.contains(&self.candidate) {
            self.trying = false;
            self.p /= f;
        } else {
            self.p = (f * self.p).min(1.0);
        }
    }

    pub fn second_send(&mut self) -> Option<u32> {
        if !self.trying {
            return None;
        }
        debug_assert!(!self.forbidden.contains(&self.candidate));
        self.assigned = Some(self.candidate);
        self.active = false;
        self.assigned
    }

    /// Records colours taken by neighbours this round. A node that has just
    /// terminated ignores them.
    pub fn second_receive(&mut self, obs: &ColorObservation) {
        if self.active {
            self.forbidden.extend(obs.colors_heard.iter().copied());
        }
    }
}

/// One full colouring round against scripted observations.
pub fn coloring_round<R: Rng + ?Sized>(
    state: &mut NodeColorState,
    params: &MisParams,
    obs1: &ColorObservation,
    obs2: &ColorObservation,
    rng: &mut R,
) -> ColorActions {
    debug_assert!(state.active);
    let sent = state.first_send(rng);
    let f = params.draw_factor(rng);
    state.first_receive(obs1, f);
    let announced = state.second_send();
    state.second_receive(obs2);
    ColorActions { sent, announced }
}
