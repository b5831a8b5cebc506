//! Truth of world formulas in a concrete state.
//!
//! Quantifiers range over the entities the (map, state) pair actually
//! contains: the map's boxes, gems, doors, the four colors, and the keys
//! currently in existence (inside boxes, on the floor, or held). Keys have
//! no names of their own; they enter only through quantified variables.
//! Atoms over ill-sorted or absent entities are false rather than errors,
//! so evaluation is total.

use crate::elot::ast::{BaseFormula, TermArg};
use crate::gridworld::map::{GemKind, GridMap, KeyColor};
use crate::gridworld::search::min_cost_to_collect;
use crate::gridworld::state::EnvState;

/// Where a key entity currently is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyLoc {
    InBox(u8),
    OnFloor(u8),
    Held,
}

/// A key that exists in the current state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyEntity {
    pub color: KeyColor,
    pub loc: KeyLoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Entity<'a> {
    Named(&'a str),
    Key(KeyEntity),
}

const BOX_NAMES: [&str; 9] = [
    "box1", "box2", "box3", "box4", "box5", "box6", "box7", "box8", "box9",
];

/// Keys in existence: untaken box contents, untaken floor keys, and one
/// entity per held color (held keys of a color are indistinguishable).
pub fn key_entities(map: &GridMap, state: &EnvState) -> Vec<KeyEntity> {
    let mut keys = Vec::new();
    for i in 0..map.boxes.len() {
        if let Some(color) = state.contents[i] {
            if !state.box_content_taken(i) {
                keys.push(KeyEntity {
                    color,
                    loc: KeyLoc::InBox(i as u8),
                });
            }
        }
    }
    for (j, &(color, _)) in map.floor_keys.iter().enumerate() {
        if !state.floor_key_taken(j) {
            keys.push(KeyEntity {
                color,
                loc: KeyLoc::OnFloor(j as u8),
            });
        }
    }
    for color in KeyColor::ALL {
        if state.held[color as usize] > 0 {
            keys.push(KeyEntity {
                color,
                loc: KeyLoc::Held,
            });
        }
    }
    keys
}

struct Ctx<'a> {
    map: &'a GridMap,
    state: &'a EnvState,
    keys: Vec<KeyEntity>,
}

impl<'a> Ctx<'a> {
    fn box_index(&self, name: &str) -> Option<usize> {
        BOX_NAMES[..self.map.boxes.len()]
            .iter()
            .position(|&b| b == name)
    }

    fn gem_index(&self, name: &str) -> Option<usize> {
        let kind = GemKind::parse(name)?;
        self.map.gem_index(kind)
    }

    fn door_index(&self, name: &str) -> Option<usize> {
        self.map
            .doors
            .iter()
            .position(|&(color, _)| color.door_name() == name)
    }

    /// Every entity a quantifier can bind. Small: at most 9 boxes, 4 colors,
    /// 4 gems, 4 doors, and the keys in existence.
    fn universe(&self) -> Vec<Entity<'a>> {
        let mut all: Vec<Entity<'a>> = Vec::new();
        all.extend(
            BOX_NAMES[..self.map.boxes.len()]
                .iter()
                .map(|&b| Entity::Named(b)),
        );
        all.extend(KeyColor::ALL.map(|c| Entity::Named(c.as_str())));
        all.extend(self.map.gems.iter().map(|&(k, _)| Entity::Named(k.as_str())));
        all.extend(
            self.map
                .doors
                .iter()
                .map(|&(c, _)| Entity::Named(c.door_name())),
        );
        all.extend(self.keys.iter().map(|&k| Entity::Key(k)));
        all
    }

    fn atom(&self, name: &str, args: &[Entity<'a>]) -> bool {
        match (name, args) {
            // Class membership.
            ("box", [Entity::Named(n)]) => self.box_index(n).is_some(),
            ("color", [Entity::Named(n)]) => KeyColor::parse(n).is_some(),
            ("gem", [Entity::Named(n)]) => self.gem_index(n).is_some(),
            ("door", [Entity::Named(n)]) => self.door_index(n).is_some(),
            ("key", [Entity::Key(_)]) => true,
            // Box contents.
            ("empty", [Entity::Named(n)]) => self.box_index(n).is_some_and(|i| {
                self.state.contents[i].is_none() || self.state.box_content_taken(i)
            }),
            ("inside", [Entity::Key(k), Entity::Named(n)]) => self
                .box_index(n)
                .is_some_and(|i| k.loc == KeyLoc::InBox(i as u8)),
            // Key and door attributes.
            ("iscolor", [Entity::Key(k), Entity::Named(c)]) => {
                KeyColor::parse(c) == Some(k.color)
            }
            ("iscolor", [Entity::Named(d), Entity::Named(c)]) => self
                .door_index(d)
                .is_some_and(|i| Some(self.map.doors[i].0) == KeyColor::parse(c)),
            ("has", [Entity::Key(k)]) => k.loc == KeyLoc::Held,
            ("onfloor", [Entity::Key(k)]) => matches!(k.loc, KeyLoc::OnFloor(_)),
            ("locked", [Entity::Named(d)]) => self
                .door_index(d)
                .is_some_and(|i| !self.state.door_unlocked(i)),
            ("unlocked", [Entity::Named(d)]) => self
                .door_index(d)
                .is_some_and(|i| self.state.door_unlocked(i)),
            // Gem status.
            ("collected", [Entity::Named(g)]) => self
                .gem_index(g)
                .is_some_and(|i| self.state.gem_collected(i)),
            ("reachable", [Entity::Named(g)]) => self
                .gem_index(g)
                .is_some_and(|i| min_cost_to_collect(self.map, self.state, i).is_some()),
            _ => false,
        }
    }

    fn eval(&self, f: &'a BaseFormula, env: &mut Vec<(&'a str, Entity<'a>)>) -> bool {
        match f {
            BaseFormula::Pred { name, args } => {
                let resolved: Vec<Entity<'a>> = args
                    .iter()
                    .map(|arg| match arg {
                        TermArg::Var(v) => env
                            .iter()
                            .rev()
                            .find(|(name, _)| name == v)
                            .map(|&(_, e)| e)
                            // Unbound variables cannot come from the parser;
                            // treat them as naming nothing.
                            .unwrap_or(Entity::Named("")),
                        TermArg::Const(c) => Entity::Named(c.as_str()),
                    })
                    .collect();
                self.atom(name, &resolved)
            }
            BaseFormula::And(items) => items.iter().all(|i| self.eval(i, env)),
            BaseFormula::Or(items) => items.iter().any(|i| self.eval(i, env)),
            BaseFormula::Not(inner) => !self.eval(inner, env),
            BaseFormula::Implies(lhs, rhs) => !self.eval(lhs, env) || self.eval(rhs, env),
            BaseFormula::Exists {
                var,
                restriction,
                body,
            } => self.universe().into_iter().any(|entity| {
                env.push((var.as_str(), entity));
                let ok = self.eval(restriction, env) && self.eval(body, env);
                env.pop();
                ok
            }),
            BaseFormula::Forall {
                var,
                restriction,
                body,
            } => self.universe().into_iter().all(|entity| {
                env.push((var.as_str(), entity));
                let ok = !self.eval(restriction, env) || self.eval(body, env);
                env.pop();
                ok
            }),
        }
    }
}

/// Truth of a closed world formula in `state`.
pub fn state_satisfies(map: &GridMap, state: &EnvState, formula: &BaseFormula) -> bool {
    let ctx = Ctx {
        map,
        state,
        keys: key_entities(map, state),
    };
    ctx.eval(formula, &mut Vec::new())
}
