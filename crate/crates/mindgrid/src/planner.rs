//! Optimal planning costs and the noisy-rational action model.
//!
//! All actions cost one, so optimal cost-to-go comes from breadth-first
//! search; [`PlanCache`] memoizes it per (state, goal). An agent acting
//! under belief `b` scores action `a` with the belief-weighted cost
//! Q̂(b, a) = Σ_j b_j Q*(s_j, a) and picks actions with probability
//! proportional to exp(-β Q̂). Worlds in which the goal is unreachable
//! contribute a large finite penalty instead of an infinite cost, so a
//! doomed-everywhere goal degrades to a uniform policy rather than
//! poisoning the arithmetic.

use std::collections::HashMap;

use crate::gridworld::map::GridMap;
use crate::gridworld::search::min_cost_to_collect;
use crate::gridworld::state::{transition, Action, EnvState};

/// Memoized optimal cost-to-go per (state, goal gem).
#[derive(Debug, Default)]
pub struct PlanCache {
    v: HashMap<(EnvState, u8), Option<u32>>,
}

impl PlanCache {
    pub fn new() -> PlanCache {
        PlanCache::default()
    }

    /// Optimal number of actions to collect `gem` from `state`; `None` if
    /// it cannot be done.
    pub fn v_star(&mut self, map: &GridMap, state: &EnvState, gem: usize) -> Option<u32> {
        *self
            .v
            .entry((*state, gem as u8))
            .or_insert_with(|| min_cost_to_collect(map, state, gem))
    }

    /// Optimal cost of taking `action` now and acting optimally afterward.
    pub fn q_star(
        &mut self,
        map: &GridMap,
        state: &EnvState,
        action: Action,
        gem: usize,
    ) -> Option<u32> {
        let next = transition(map, state, action);
        self.v_star(map, &next, gem).map(|v| v + 1)
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }
}

/// Upper bound on any optimal plan length for this map: between two
/// interactions (open, pickup, unlock, collect) an optimal plan never needs
/// more moves than there are cells.
pub fn plan_length_bound(map: &GridMap) -> u32 {
    let cells = map.width as u32 * map.height as u32;
    let interactions = 2 * map.boxes.len() as u32
        + map.floor_keys.len() as u32
        + map.doors.len() as u32
        + 1;
    (cells + 1) * (interactions + 1)
}

/// Finite stand-in for an infinite cost-to-go, comfortably above any real
/// plan so hopeless choices are strongly dispreferred, yet finite so that a
/// goal hopeless under every particle still yields a (uniform) policy.
pub fn infinity_penalty(map: &GridMap) -> f64 {
    10.0 * plan_length_bound(map) as f64
}

/// Belief-weighted action cost Q̂(b, a) = Σ_j b_j Q*(s_j, a), with
/// unreachable-goal worlds contributing `penalty`.
pub fn q_hat(
    cache: &mut PlanCache,
    map: &GridMap,
    particles: &[(EnvState, f64)],
    action: Action,
    gem: usize,
    penalty: f64,
) -> f64 {
    particles
        .iter()
        .map(|&(state, weight)| {
            let q = cache
                .q_star(map, &state, action, gem)
                .map_or(penalty, f64::from);
            weight * q
        })
        .sum()
}

/// Manhattan-heuristic action cost for the non-planning lesioned agent:
/// one step plus straight-line distance from where the action lands to the
/// goal gem, ignoring walls, doors, and keys.
pub fn manhattan_q(map: &GridMap, state: &EnvState, action: Action, gem: usize) -> f64 {
    let next = transition(map, state, action);
    if next.gem_collected(gem) {
        return 1.0;
    }
    let (gx, gy) = map.gems[gem].1;
    let dx = (next.pos.0 as i32 - gx as i32).abs();
    let dy = (next.pos.1 as i32 - gy as i32).abs();
    1.0 + (dx + dy) as f64
}

/// Numerically safe log(Σ exp(x)).
pub fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Log-probabilities of a Boltzmann policy over action costs:
/// log P(a) = -β Q̂(a) - log Σ exp(-β Q̂). Equal costs give a uniform
/// policy, including the all-hopeless case where every cost is the penalty.
pub fn boltzmann_log_policy(costs: &[f64], beta: f64) -> Vec<f64> {
    let scores: Vec<f64> = costs.iter().map(|q| -beta * q).collect();
    let z = logsumexp(&scores);
    scores.iter().map(|s| s - z).collect()
}

/// Default inverse temperature of the action model.
pub fn default_beta() -> f64 {
    2f64.powf(1.5)
}
