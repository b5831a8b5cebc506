//! Hypothesis space over initial states.
//!
//! An onlooker who cannot see inside boxes entertains one initial state per
//! plausible box-content assignment. [`ScenarioRules`] captures the
//! scenario's stated constraints (how many keys might be hidden, which
//! colors, whether the puzzle is guaranteed solvable and free of redundant
//! keys), and [`enumerate_initial_states`] lists every assignment passing
//! them, in a deterministic lexicographic order.

use crate::gridworld::map::{GridMap, KeyColor};
use crate::gridworld::search::min_cost_to_collect;
use crate::gridworld::state::{BoxContent, EnvState};

/// Constraints defining which box-content assignments are plausible a
/// priori.
#[derive(Debug, Clone)]
pub struct ScenarioRules {
    /// Upper bound on the number of hidden keys across all boxes.
    pub max_hidden_keys: usize,
    /// Colors a hidden key may have, in any order (normalized internally).
    pub hidden_colors: Vec<KeyColor>,
    /// Exact multiset of hidden keys, as (color, count) pairs, when the
    /// scenario states it outright.
    pub required_hidden: Option<Vec<(KeyColor, usize)>>,
    /// Keep only assignments under which every gem can be collected.
    pub solvable_for_every_gem: bool,
    /// Keep only assignments with no redundant key: removing any single
    /// hidden key must make some gem uncollectable.
    pub no_excess: bool,
}

impl Default for ScenarioRules {
    fn default() -> ScenarioRules {
        ScenarioRules {
            max_hidden_keys: 2,
            hidden_colors: KeyColor::ALL.to_vec(),
            required_hidden: None,
            solvable_for_every_gem: true,
            no_excess: true,
        }
    }
}

fn every_gem_collectable(map: &GridMap, assignment: &[BoxContent]) -> bool {
    let s0 = map.initial_state(assignment);
    (0..map.gems.len()).all(|g| min_cost_to_collect(map, &s0, g).is_some())
}

fn passes(map: &GridMap, rules: &ScenarioRules, assignment: &[BoxContent]) -> bool {
    if let Some(required) = &rules.required_hidden {
        for color in KeyColor::ALL {
            let have = assignment.iter().filter(|c| **c == Some(color)).count();
            let want = required
                .iter()
                .filter(|(c, _)| *c == color)
                .map(|(_, n)| *n)
                .sum::<usize>();
            if have != want {
                return false;
            }
        }
    }
    if rules.solvable_for_every_gem && !every_gem_collectable(map, assignment) {
        return false;
    }
    if rules.no_excess {
        for i in 0..assignment.len() {
            if assignment[i].is_none() {
                continue;
            }
            let mut reduced = assignment.to_vec();
            reduced[i] = None;
            if every_gem_collectable(map, &reduced) {
                // This key was not needed for anything.
                return false;
            }
        }
    }
    true
}

/// All initial states consistent with the rules, ordered lexicographically
/// by box: empty sorts before a key, and key colors sort red, blue, green,
/// yellow.
pub fn enumerate_initial_states(map: &GridMap, rules: &ScenarioRules) -> Vec<EnvState> {
    let mut colors = rules.hidden_colors.clone();
    colors.sort();
    colors.dedup();
    let mut options: Vec<BoxContent> = vec![None];
    options.extend(colors.iter().map(|&c| Some(c)));

    let n = map.boxes.len();
    let mut states = Vec::new();
    let mut assignment: Vec<BoxContent> = vec![None; n];
    fill(
        map,
        rules,
        &options,
        &mut assignment,
        0,
        0,
        &mut states,
    );
    states
}

fn fill(
    map: &GridMap,
    rules: &ScenarioRules,
    options: &[BoxContent],
    assignment: &mut Vec<BoxContent>,
    index: usize,
    hidden_so_far: usize,
    out: &mut Vec<EnvState>,
) {
    if index == assignment.len() {
        if passes(map, rules, assignment) {
            out.push(map.initial_state(assignment));
        }
        return;
    }
    for &option in options {
        let hidden = hidden_so_far + usize::from(option.is_some());
        if hidden > rules.max_hidden_keys {
            continue;
        }
        assignment[index] = option;
        fill(map, rules, options, assignment, index + 1, hidden, out);
    }
    assignment[index] = None;
}
