//! Doors, keys, and gems gridworld.
//!
//! A 4-connected grid with walls, numbered boxes that may hide colored
//! keys, keys lying on the floor, colored locked doors, and up to four gems.
//! The agent moves, opens boxes, picks up and spends keys, and collects a
//! gem, which ends the episode. [`observe`] hides closed-box contents, and
//! [`enumerate_initial_states`] spans the hypothesis space an onlooker
//! entertains over what the boxes hold.

pub mod enumerate;
pub mod map;
pub mod satisfy;
pub mod search;
pub mod state;

pub use enumerate::{enumerate_initial_states, ScenarioRules};
pub use map::{Cell, GemKind, GridMap, KeyColor, MapError, MAX_BOXES, MAX_FLOOR_KEYS};
pub use satisfy::{key_entities, state_satisfies, KeyEntity, KeyLoc};
pub use search::min_cost_to_collect;
pub use state::{
    enterable, observe, transition, valid_actions, Action, BoxContent, Dir, EnvState,
    ObservedContent, Observation,
};
