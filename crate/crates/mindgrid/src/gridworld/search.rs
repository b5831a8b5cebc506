//! Reachability search over episode states.
//!
//! Actions all cost one, so breadth-first search finds minimum action
//! counts. The search never collects a gem other than the target: doing so
//! ends the episode, which can only hurt.

use std::collections::{HashSet, VecDeque};

use crate::gridworld::map::GridMap;
use crate::gridworld::state::{transition, valid_actions, Action, EnvState};

/// Minimum number of actions to have collected gem `gem` starting from
/// `state`, or `None` if no action sequence achieves it.
pub fn min_cost_to_collect(map: &GridMap, state: &EnvState, gem: usize) -> Option<u32> {
    if state.gem_collected(gem) {
        return Some(0);
    }
    if state.terminal() {
        // A different gem ended the episode.
        return None;
    }
    let mut visited: HashSet<EnvState> = HashSet::new();
    let mut queue: VecDeque<(EnvState, u32)> = VecDeque::new();
    visited.insert(*state);
    queue.push_back((*state, 0));
    while let Some((current, dist)) = queue.pop_front() {
        for action in valid_actions(map, &current) {
            match action {
                Action::NoOp => continue,
                Action::Collect(g) if g as usize != gem => continue,
                Action::Collect(_) => return Some(dist + 1),
                _ => {}
            }
            let next = transition(map, &current, action);
            if visited.insert(next) {
                queue.push_back((next, dist + 1));
            }
        }
    }
    None
}
