//! Domain signature: the predicate, class, agent and constant vocabulary a
//! formula is checked against.
//!
//! The signature is data, not code, so alternative domains can reuse the
//! parser and evaluator. [`DomainSignature::doors_keys_gems`] builds the
//! vocabulary for the gridworld shipped with this crate.

use std::collections::BTreeMap;

/// Argument sort of a predicate position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    /// Any object constant or variable.
    Object,
}

/// A predicate's arity and argument sorts.
#[derive(Debug, Clone)]
pub struct PredSig {
    pub arity: usize,
}

/// A unary class predicate together with its member constants.
///
/// Classes back quantifier restrictions and the `*_about` operators. A class
/// whose membership cannot be enumerated syntactically (e.g. keys, which are
/// identified by where they are rather than by name) is marked
/// `enumerable: false`; quantifiers over it are expanded against the world
/// state at evaluation time instead of at lowering time.
#[derive(Debug, Clone)]
pub struct ClassSig {
    pub members: Vec<String>,
    pub enumerable: bool,
}

/// Vocabulary for one planning domain.
#[derive(Debug, Clone)]
pub struct DomainSignature {
    pub agents: Vec<String>,
    /// Non-class predicates, keyed by name.
    pub predicates: BTreeMap<String, PredSig>,
    /// Class predicates, keyed by name.
    pub classes: BTreeMap<String, ClassSig>,
    /// Object constants that are not members of any class (none at present,
    /// kept for forward compatibility).
    pub extra_constants: Vec<String>,
}

impl DomainSignature {
    /// Vocabulary for the doors, keys and gems gridworld.
    ///
    /// Classes: `box` (box1..box9, trimmed to the map's boxes by the caller
    /// if desired; membership here is the maximal set), `color`, `gem`,
    /// `door`, and the non-enumerable `key`. Predicates: `empty(box)`,
    /// `inside(key, box)`, `iscolor(x, color)`, `has(agent-or-key holder)`,
    /// `locked(door)`, `reachable(gem)`, `collected(gem)`, `onfloor(key)`.
    pub fn doors_keys_gems() -> DomainSignature {
        let mut predicates = BTreeMap::new();
        for (name, arity) in [
            ("empty", 1),
            ("inside", 2),
            ("iscolor", 2),
            ("has", 1),
            ("locked", 1),
            ("unlocked", 1),
            ("reachable", 1),
            ("collected", 1),
            ("onfloor", 1),
        ] {
            predicates.insert(name.to_owned(), PredSig { arity });
        }

        let mut classes = BTreeMap::new();
        classes.insert(
            "box".to_owned(),
            ClassSig {
                members: (1..=9).map(|i| format!("box{i}")).collect(),
                enumerable: true,
            },
        );
        classes.insert(
            "color".to_owned(),
            ClassSig {
                members: ["red", "blue", "green", "yellow"]
                    .map(str::to_owned)
                    .to_vec(),
                enumerable: true,
            },
        );
        classes.insert(
            "gem".to_owned(),
            ClassSig {
                members: ["triangle", "square", "hexagon", "circle"]
                    .map(str::to_owned)
                    .to_vec(),
                enumerable: true,
            },
        );
        classes.insert(
            "door".to_owned(),
            ClassSig {
                members: ["red_door", "blue_door", "green_door", "yellow_door"]
                    .map(str::to_owned)
                    .to_vec(),
                enumerable: true,
            },
        );
        // Keys have no stable names: a key is "the key in box2" or "the red
        // key on the floor". Quantifiers over keys defer to the world state.
        classes.insert(
            "key".to_owned(),
            ClassSig {
                members: Vec::new(),
                enumerable: false,
            },
        );

        DomainSignature {
            agents: vec!["player".to_owned()],
            predicates,
            classes,
            extra_constants: Vec::new(),
        }
    }

    pub fn is_agent(&self, name: &str) -> bool {
        self.agents.iter().any(|a| a == name)
    }

    pub fn is_class(&self, name: &str) -> bool {
        self.classes.contains_key(name)
    }

    pub fn is_predicate(&self, name: &str) -> bool {
        self.predicates.contains_key(name)
    }

    /// True if `name` is a known object constant (a member of any enumerable
    /// class, or an extra constant).
    pub fn is_constant(&self, name: &str) -> bool {
        self.extra_constants.iter().any(|c| c == name)
            || self
                .classes
                .values()
                .any(|c| c.members.iter().any(|m| m == name))
    }

    /// Members of an enumerable class, or `None` for non-enumerable ones.
    pub fn class_members(&self, name: &str) -> Option<&[String]> {
        let class = self.classes.get(name)?;
        class.enumerable.then_some(class.members.as_slice())
    }
}
