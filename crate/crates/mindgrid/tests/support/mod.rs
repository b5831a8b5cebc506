//! Shared fixtures and generators for the integration test targets.
//!
//! Holds the watched-episode pool, the decision-tape formula generators,
//! and a brute-force statement interpreter written directly from the
//! operator definitions. The interpreter shares nothing with the engine
//! but the world-formula satisfaction relation and the threshold table:
//! it does its own substitution, its own quantifier expansion, and
//! replays candidate worlds action by action instead of touching the
//! inference engine's cached trajectories.

#![allow(dead_code)]

use std::sync::OnceLock;

use mindgrid::btom::{run_inference, AgentVariant, InferenceConfig, Posterior};
use mindgrid::elot::{
    BaseFormula, ClassRef, DomainSignature, EpistemicFormula, ModalFormula, TermArg,
    ThresholdName, ThresholdTable,
};
use mindgrid::gridworld::{
    enumerate_initial_states, state_satisfies, transition, valid_actions, Action, EnvState,
    GridMap, KeyColor, ScenarioRules,
};

// ---------------------------------------------------------------------------
// Watched episodes.

/// Two boxes in an open room, both gems reachable without keys.
pub const ROOM: &str = "\
#########
#@.1..T.#
#.......#
#..2..S.#
#########";

/// One box, one floor key, one door. The door never gates a gem, but
/// unlocking it exercises held-key and door dynamics.
pub const HALLWAY: &str = "\
#######
#@.1.T#
#.....#
#b.B.S#
#######";

pub fn room_rules() -> ScenarioRules {
    ScenarioRules {
        max_hidden_keys: 1,
        hidden_colors: vec![KeyColor::Red, KeyColor::Blue],
        required_hidden: None,
        solvable_for_every_gem: false,
        no_excess: false,
    }
}

pub fn hallway_rules() -> ScenarioRules {
    ScenarioRules {
        max_hidden_keys: 1,
        hidden_colors: vec![KeyColor::Blue, KeyColor::Green],
        required_hidden: None,
        solvable_for_every_gem: false,
        no_excess: false,
    }
}

/// Builds a posterior for a scripted episode, first asserting that the true
/// world is a candidate and that every scripted action is legal in it, so a
/// broken fixture fails loudly instead of testing nothing.
pub fn build_episode(
    ascii: &str,
    rules: &ScenarioRules,
    true_contents: &[Option<KeyColor>],
    actions: Vec<Action>,
    particles: u8,
    variant: AgentVariant,
) -> Posterior {
    let map = GridMap::from_ascii(ascii).expect("fixture map parses");
    let candidates = enumerate_initial_states(&map, rules);
    let true_initial = map.initial_state(true_contents);
    assert!(
        candidates.contains(&true_initial),
        "true world must be a candidate"
    );
    let mut state = true_initial;
    for (i, &a) in actions.iter().enumerate() {
        assert!(
            valid_actions(&map, &state).contains(&a),
            "fixture action {i} ({a:?}) is invalid"
        );
        state = transition(&map, &state, a);
    }
    let config = InferenceConfig {
        particles,
        variant,
        ..InferenceConfig::default()
    };
    run_inference(&map, &candidates, &true_initial, &actions, &config)
        .expect("fixture inference runs")
}

pub fn open_then_square() -> Vec<Action> {
    use mindgrid::gridworld::Dir::{Down, Right};
    use Action::{Collect, Move, Open, PickupKey};
    vec![
        Move(Right),
        Open(0),
        PickupKey((3, 1)),
        Move(Down),
        Move(Right),
        Move(Right),
        Move(Right),
        Move(Down),
        Collect(1),
    ]
}

pub fn straight_to_square() -> Vec<Action> {
    use mindgrid::gridworld::Dir::{Down, Right};
    use Action::{Collect, Move};
    vec![
        Move(Down),
        Move(Right),
        Move(Right),
        Move(Right),
        Move(Right),
        Move(Down),
        Collect(1),
    ]
}

pub fn floor_key_route() -> Vec<Action> {
    use mindgrid::gridworld::Dir::{Down, Right};
    use Action::{Collect, Move, PickupKey, Unlock};
    vec![
        Move(Down),
        PickupKey((1, 3)),
        Move(Down),
        Move(Right),
        Unlock(0),
        Move(Right),
        Move(Right),
        Collect(1),
    ]
}

pub fn box_key_route() -> Vec<Action> {
    use mindgrid::gridworld::Dir::{Down, Right};
    use Action::{Collect, Move, Open, PickupKey, Unlock};
    vec![
        Move(Right),
        Open(0),
        PickupKey((3, 1)),
        Move(Down),
        Move(Down),
        Unlock(0),
        Move(Right),
        Move(Right),
        Collect(1),
    ]
}

pub fn episodes() -> &'static [Posterior] {
    static POOL: OnceLock<Vec<Posterior>> = OnceLock::new();
    POOL.get_or_init(|| {
        let red_in_box1 = [Some(KeyColor::Red), None];
        let blue_in_box1 = [Some(KeyColor::Blue)];
        vec![
            build_episode(
                ROOM,
                &room_rules(),
                &red_in_box1,
                open_then_square(),
                2,
                AgentVariant::Full,
            ),
            build_episode(
                ROOM,
                &room_rules(),
                &red_in_box1,
                straight_to_square(),
                2,
                AgentVariant::Full,
            ),
            build_episode(
                HALLWAY,
                &hallway_rules(),
                &blue_in_box1,
                floor_key_route(),
                3,
                AgentVariant::Full,
            ),
            build_episode(
                HALLWAY,
                &hallway_rules(),
                &blue_in_box1,
                box_key_route(),
                3,
                AgentVariant::Full,
            ),
            build_episode(
                ROOM,
                &room_rules(),
                &red_in_box1,
                open_then_square(),
                2,
                AgentVariant::TrueBelief,
            ),
            build_episode(
                HALLWAY,
                &hallway_rules(),
                &blue_in_box1,
                box_key_route(),
                3,
                AgentVariant::TrueBelief,
            ),
        ]
    })
}

pub fn full_episode_indices() -> [usize; 4] {
    [0, 1, 2, 3]
}

pub fn true_belief_episode_indices() -> [usize; 2] {
    [4, 5]
}

/// Candidate `j`'s world after the first `t` watched actions, recomputed
/// from scratch rather than read out of the posterior's cache.
pub fn replay(posterior: &Posterior, j: usize, t: usize) -> EnvState {
    posterior.actions[..t]
        .iter()
        .fold(posterior.candidates[j], |s, &a| {
            transition(&posterior.map, &s, a)
        })
}

/// Picks an (episode, hypothesis, time) triple from three raw draws.
pub fn pick_context(pool: &[usize], pidx: u32, hseed: u32, tseed: u32) -> (usize, usize, usize) {
    let eps = episodes();
    let e = pool[pidx as usize % pool.len()];
    let p = &eps[e];
    let h = hseed as usize % p.n_hypotheses();
    let t = tseed as usize % (p.horizon() + 1);
    (e, h, t)
}

// ---------------------------------------------------------------------------
// Decision tape: a deterministic choice stream drawn by proptest.
//
// Generating recursive, scope-sensitive formulas directly as strategies gets
// unwieldy; instead proptest supplies a vector of raw draws and the
// generators below consume it like a tape. Shrinking the tape toward zeros
// shrinks formulas toward their first (smallest) alternatives.

pub struct Tape {
    vals: Vec<u32>,
    pos: usize,
    fresh: usize,
}

impl Tape {
    pub fn new(vals: Vec<u32>) -> Tape {
        assert!(!vals.is_empty());
        Tape {
            vals,
            pos: 0,
            fresh: 0,
        }
    }

    pub fn next(&mut self) -> u32 {
        let v = self.vals[self.pos % self.vals.len()];
        // Wrapping reuse alone would loop identical choices; mix in the
        // position so long formulas keep varying.
        let salted = v ^ (self.pos as u32).wrapping_mul(0x9e37_79b9);
        self.pos += 1;
        salted
    }

    pub fn pick(&mut self, n: usize) -> usize {
        assert!(n > 0);
        self.next() as usize % n
    }

    pub fn chance(&mut self, num: u32, den: u32) -> bool {
        self.next() % den < num
    }

    pub fn fresh_var(&mut self) -> String {
        self.fresh += 1;
        format!("V{}", self.fresh)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum VarSort {
    Boxes,
    Colors,
    Gems,
    Doors,
    Keys,
}

impl VarSort {
    pub fn class(self) -> &'static str {
        match self {
            VarSort::Boxes => "box",
            VarSort::Colors => "color",
            VarSort::Gems => "gem",
            VarSort::Doors => "door",
            VarSort::Keys => "key",
        }
    }
}

pub type Scope = Vec<(String, VarSort)>;

pub fn pred(name: &str, args: Vec<TermArg>) -> BaseFormula {
    BaseFormula::Pred {
        name: name.to_owned(),
        args,
    }
}

pub fn cst(name: &str) -> TermArg {
    TermArg::Const(name.to_owned())
}

pub fn var(name: &str) -> TermArg {
    TermArg::Var(name.to_owned())
}

pub const BOX_CONSTS: [&str; 4] = ["box1", "box2", "box3", "box9"];
pub const COLOR_CONSTS: [&str; 4] = ["red", "blue", "green", "yellow"];
pub const GEM_CONSTS: [&str; 4] = ["triangle", "square", "hexagon", "circle"];
pub const DOOR_CONSTS: [&str; 2] = ["red_door", "blue_door"];

/// One ground or scope-using atom. Atoms over bound variables are pushed
/// twice so quantified bodies usually mention their variable.
pub fn gen_atom(tape: &mut Tape, scope: &Scope) -> BaseFormula {
    let box_c = BOX_CONSTS[tape.pick(BOX_CONSTS.len())];
    let color_c = COLOR_CONSTS[tape.pick(COLOR_CONSTS.len())];
    let gem_c = GEM_CONSTS[tape.pick(GEM_CONSTS.len())];
    let door_c = DOOR_CONSTS[tape.pick(DOOR_CONSTS.len())];

    let mut choices: Vec<BaseFormula> = vec![
        pred("empty", vec![cst(box_c)]),
        pred("locked", vec![cst(door_c)]),
        pred("unlocked", vec![cst(door_c)]),
        pred("collected", vec![cst(gem_c)]),
        pred("reachable", vec![cst(gem_c)]),
        pred("iscolor", vec![cst(door_c), cst(color_c)]),
    ];
    for (name, sort) in scope {
        let v = || var(name);
        let mut own: Vec<BaseFormula> = match sort {
            VarSort::Boxes => vec![pred("empty", vec![v()]), pred("box", vec![v()])],
            VarSort::Colors => vec![
                pred("iscolor", vec![cst(door_c), v()]),
                pred("color", vec![v()]),
            ],
            VarSort::Gems => vec![
                pred("collected", vec![v()]),
                pred("reachable", vec![v()]),
                pred("gem", vec![v()]),
            ],
            VarSort::Doors => vec![
                pred("locked", vec![v()]),
                pred("unlocked", vec![v()]),
                pred("iscolor", vec![v(), cst(color_c)]),
            ],
            VarSort::Keys => vec![
                pred("has", vec![v()]),
                pred("onfloor", vec![v()]),
                pred("inside", vec![v(), cst(box_c)]),
                pred("iscolor", vec![v(), cst(color_c)]),
            ],
        };
        if *sort == VarSort::Keys {
            if let Some((bn, _)) = scope.iter().find(|(_, s)| *s == VarSort::Boxes) {
                own.push(pred("inside", vec![v(), var(bn)]));
            }
            if let Some((cn, _)) = scope.iter().find(|(_, s)| *s == VarSort::Colors) {
                own.push(pred("iscolor", vec![v(), var(cn)]));
            }
        }
        choices.extend(own.iter().cloned());
        choices.extend(own);
    }
    choices.swap_remove(tape.pick(choices.len()))
}

/// A quantifier restriction: the class applied to a fresh variable, with an
/// occasional extra conjunct over that variable.
pub fn gen_restriction(
    tape: &mut Tape,
    scope: &Scope,
    allow_keys: bool,
) -> (String, VarSort, BaseFormula) {
    let sorts: &[VarSort] = if allow_keys {
        &[
            VarSort::Boxes,
            VarSort::Colors,
            VarSort::Gems,
            VarSort::Doors,
            VarSort::Keys,
        ]
    } else {
        &[
            VarSort::Boxes,
            VarSort::Colors,
            VarSort::Gems,
            VarSort::Doors,
        ]
    };
    let sort = sorts[tape.pick(sorts.len())];
    let name = tape.fresh_var();
    let class_atom = pred(sort.class(), vec![var(&name)]);
    if tape.chance(1, 3) {
        let mut inner = scope.clone();
        inner.push((name.clone(), sort));
        // Draw extras until one actually mentions the bound variable, so the
        // guard is not vacuous; give up after a few tries.
        let mut extra = gen_atom(tape, &inner);
        for _ in 0..3 {
            if mentions_var(&extra, &name) {
                break;
            }
            extra = gen_atom(tape, &inner);
        }
        (name, sort, BaseFormula::And(vec![class_atom, extra]))
    } else {
        (name, sort, class_atom)
    }
}

pub fn mentions_var(f: &BaseFormula, name: &str) -> bool {
    match f {
        BaseFormula::Pred { args, .. } => args
            .iter()
            .any(|a| matches!(a, TermArg::Var(v) if v == name)),
        BaseFormula::And(items) | BaseFormula::Or(items) => {
            items.iter().any(|i| mentions_var(i, name))
        }
        BaseFormula::Not(inner) => mentions_var(inner, name),
        BaseFormula::Implies(a, b) => mentions_var(a, name) || mentions_var(b, name),
        BaseFormula::Exists {
            var,
            restriction,
            body,
        }
        | BaseFormula::Forall {
            var,
            restriction,
            body,
        } => var != name && (mentions_var(restriction, name) || mentions_var(body, name)),
    }
}

pub fn gen_base(tape: &mut Tape, depth: usize, scope: &mut Scope) -> BaseFormula {
    if depth == 0 {
        return gen_atom(tape, scope);
    }
    match tape.pick(8) {
        0 | 1 | 2 => gen_atom(tape, scope),
        3 => BaseFormula::Not(Box::new(gen_base(tape, depth - 1, scope))),
        4 => {
            let n = 2 + tape.pick(2);
            BaseFormula::And((0..n).map(|_| gen_base(tape, depth - 1, scope)).collect())
        }
        5 => {
            let n = 2 + tape.pick(2);
            BaseFormula::Or((0..n).map(|_| gen_base(tape, depth - 1, scope)).collect())
        }
        6 => BaseFormula::Implies(
            Box::new(gen_base(tape, depth - 1, scope)),
            Box::new(gen_base(tape, depth - 1, scope)),
        ),
        _ => {
            let (name, sort, restriction) = gen_restriction(tape, scope, true);
            scope.push((name.clone(), sort));
            let body = gen_base(tape, depth - 1, scope);
            scope.pop();
            if tape.chance(1, 2) {
                BaseFormula::Exists {
                    var: name,
                    restriction: Box::new(restriction),
                    body: Box::new(body),
                }
            } else {
                BaseFormula::Forall {
                    var: name,
                    restriction: Box::new(restriction),
                    body: Box::new(body),
                }
            }
        }
    }
}

pub const GRADED: [ThresholdName; 7] = [
    ThresholdName::Could,
    ThresholdName::Might,
    ThresholdName::May,
    ThresholdName::Should,
    ThresholdName::Must,
    ThresholdName::Likely,
    ThresholdName::Unlikely,
];

pub const ENUM_CLASSES: [VarSort; 4] = [
    VarSort::Boxes,
    VarSort::Colors,
    VarSort::Gems,
    VarSort::Doors,
];

pub fn class_members_of(sort: VarSort) -> &'static [&'static str] {
    match sort {
        VarSort::Boxes => &[
            "box1", "box2", "box3", "box4", "box5", "box6", "box7", "box8", "box9",
        ],
        VarSort::Colors => &["red", "blue", "green", "yellow"],
        VarSort::Gems => &["triangle", "square", "hexagon", "circle"],
        VarSort::Doors => &["red_door", "blue_door", "green_door", "yellow_door"],
        VarSort::Keys => &[],
    }
}

pub fn gen_class_op(tape: &mut Tape, scope: &mut Scope) -> (ClassRef, VarSort, BaseFormula) {
    let sort = ENUM_CLASSES[tape.pick(ENUM_CLASSES.len())];
    let name = tape.fresh_var();
    scope.push((name.clone(), sort));
    let body = gen_base(tape, 2, scope);
    scope.pop();
    (
        ClassRef {
            pred: sort.class().to_owned(),
            var: name,
        },
        sort,
        body,
    )
}

pub fn gen_statement_leaf(tape: &mut Tape, scope: &mut Scope) -> EpistemicFormula {
    let agent = "player".to_owned();
    match tape.pick(15) {
        0 => EpistemicFormula::Believes {
            agent,
            body: gen_base(tape, 2, scope),
        },
        1 => EpistemicFormula::KnowsThat {
            agent,
            body: gen_base(tape, 2, scope),
        },
        2 => EpistemicFormula::KnowsIf {
            agent,
            body: gen_base(tape, 2, scope),
        },
        3 => EpistemicFormula::NotKnowsThat {
            agent,
            body: gen_base(tape, 2, scope),
        },
        4 => EpistemicFormula::NotKnowsIf {
            agent,
            body: gen_base(tape, 2, scope),
        },
        5 => EpistemicFormula::CertainThat {
            agent,
            body: gen_base(tape, 2, scope),
        },
        6 => EpistemicFormula::UncertainIf {
            agent,
            left: gen_base(tape, 2, scope),
            right: gen_base(tape, 2, scope),
        },
        7 => {
            let (class, _, body) = gen_class_op(tape, scope);
            EpistemicFormula::KnowsAbout { agent, class, body }
        }
        8 => {
            let (class, _, body) = gen_class_op(tape, scope);
            EpistemicFormula::CertainAbout { agent, class, body }
        }
        9 => {
            let (class, _, body) = gen_class_op(tape, scope);
            EpistemicFormula::UncertainAbout { agent, class, body }
        }
        10 => EpistemicFormula::BelievesModal {
            agent,
            modal: ModalFormula::Graded {
                word: GRADED[tape.pick(GRADED.len())],
                body: gen_base(tape, 2, scope),
            },
        },
        11 => {
            let pred = ThresholdName::ALL[tape.pick(10)];
            let left = gen_base(tape, 2, scope);
            let right = gen_base(tape, 2, scope);
            let modal = if tape.chance(1, 2) {
                ModalFormula::More { pred, left, right }
            } else {
                ModalFormula::Less { pred, left, right }
            };
            EpistemicFormula::BelievesModal { agent, modal }
        }
        12 => {
            let pred = ThresholdName::ALL[tape.pick(10)];
            let (class, sort, body) = gen_class_op(tape, scope);
            let members = class_members_of(sort);
            let object = members[tape.pick(members.len())].to_owned();
            let modal = if tape.chance(1, 2) {
                ModalFormula::MostSup {
                    pred,
                    object,
                    class,
                    body,
                }
            } else {
                ModalFormula::LeastSup {
                    pred,
                    object,
                    class,
                    body,
                }
            };
            EpistemicFormula::BelievesModal { agent, modal }
        }
        13 => {
            let pred = ThresholdName::ALL[tape.pick(10)];
            let body = gen_base(tape, 2, scope);
            let modal = if tape.chance(1, 2) {
                ModalFormula::MostStr { pred, body }
            } else {
                ModalFormula::LeastStr { pred, body }
            };
            EpistemicFormula::BelievesModal { agent, modal }
        }
        _ => EpistemicFormula::Believes {
            agent,
            body: gen_base(tape, 2, scope),
        },
    }
}

pub fn gen_statement(tape: &mut Tape, depth: usize, scope: &mut Scope) -> EpistemicFormula {
    if depth == 0 {
        return gen_statement_leaf(tape, scope);
    }
    match tape.pick(10) {
        0..=4 => gen_statement_leaf(tape, scope),
        5 => {
            let n = 2 + tape.pick(2);
            EpistemicFormula::And(
                (0..n)
                    .map(|_| gen_statement(tape, depth - 1, scope))
                    .collect(),
            )
        }
        6 => {
            let n = 2 + tape.pick(2);
            EpistemicFormula::Or(
                (0..n)
                    .map(|_| gen_statement(tape, depth - 1, scope))
                    .collect(),
            )
        }
        7 => EpistemicFormula::Not(Box::new(gen_statement(tape, depth - 1, scope))),
        8 => EpistemicFormula::Implies(
            Box::new(gen_statement(tape, depth - 1, scope)),
            Box::new(gen_statement(tape, depth - 1, scope)),
        ),
        _ => {
            let (name, sort, restriction) = gen_restriction(tape, scope, false);
            scope.push((name.clone(), sort));
            let body = Box::new(gen_statement(tape, depth - 1, scope));
            scope.pop();
            if tape.chance(1, 2) {
                EpistemicFormula::Exists {
                    var: name,
                    restriction,
                    body,
                }
            } else {
                EpistemicFormula::Forall {
                    var: name,
                    restriction,
                    body,
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Brute-force statement interpreter.

pub fn subst_args(args: &[TermArg], name: &str, value: &str) -> Vec<TermArg> {
    args.iter()
        .map(|a| match a {
            TermArg::Var(v) if v == name => TermArg::Const(value.to_owned()),
            other => other.clone(),
        })
        .collect()
}

pub fn subst_world(f: &BaseFormula, name: &str, value: &str) -> BaseFormula {
    match f {
        BaseFormula::Pred { name: p, args } => BaseFormula::Pred {
            name: p.clone(),
            args: subst_args(args, name, value),
        },
        BaseFormula::And(items) => {
            BaseFormula::And(items.iter().map(|i| subst_world(i, name, value)).collect())
        }
        BaseFormula::Or(items) => {
            BaseFormula::Or(items.iter().map(|i| subst_world(i, name, value)).collect())
        }
        BaseFormula::Not(inner) => BaseFormula::Not(Box::new(subst_world(inner, name, value))),
        BaseFormula::Implies(a, b) => BaseFormula::Implies(
            Box::new(subst_world(a, name, value)),
            Box::new(subst_world(b, name, value)),
        ),
        BaseFormula::Exists {
            var,
            restriction,
            body,
        } => {
            if var == name {
                f.clone()
            } else {
                BaseFormula::Exists {
                    var: var.clone(),
                    restriction: Box::new(subst_world(restriction, name, value)),
                    body: Box::new(subst_world(body, name, value)),
                }
            }
        }
        BaseFormula::Forall {
            var,
            restriction,
            body,
        } => {
            if var == name {
                f.clone()
            } else {
                BaseFormula::Forall {
                    var: var.clone(),
                    restriction: Box::new(subst_world(restriction, name, value)),
                    body: Box::new(subst_world(body, name, value)),
                }
            }
        }
    }
}

pub fn subst_modal(m: &ModalFormula, name: &str, value: &str) -> ModalFormula {
    match m {
        ModalFormula::Graded { word, body } => ModalFormula::Graded {
            word: *word,
            body: subst_world(body, name, value),
        },
        ModalFormula::More { pred, left, right } => ModalFormula::More {
            pred: *pred,
            left: subst_world(left, name, value),
            right: subst_world(right, name, value),
        },
        ModalFormula::Less { pred, left, right } => ModalFormula::Less {
            pred: *pred,
            left: subst_world(left, name, value),
            right: subst_world(right, name, value),
        },
        ModalFormula::MostSup {
            pred,
            object,
            class,
            body,
        } => ModalFormula::MostSup {
            pred: *pred,
            object: object.clone(),
            class: class.clone(),
            body: if class.var == name {
                body.clone()
            } else {
                subst_world(body, name, value)
            },
        },
        ModalFormula::LeastSup {
            pred,
            object,
            class,
            body,
        } => ModalFormula::LeastSup {
            pred: *pred,
            object: object.clone(),
            class: class.clone(),
            body: if class.var == name {
                body.clone()
            } else {
                subst_world(body, name, value)
            },
        },
        ModalFormula::MostStr { pred, body } => ModalFormula::MostStr {
            pred: *pred,
            body: subst_world(body, name, value),
        },
        ModalFormula::LeastStr { pred, body } => ModalFormula::LeastStr {
            pred: *pred,
            body: subst_world(body, name, value),
        },
    }
}

pub fn subst_statement(f: &EpistemicFormula, name: &str, value: &str) -> EpistemicFormula {
    let b = |body: &BaseFormula| subst_world(body, name, value);
    match f {
        EpistemicFormula::Believes { agent, body } => EpistemicFormula::Believes {
            agent: agent.clone(),
            body: b(body),
        },
        EpistemicFormula::BelievesModal { agent, modal } => EpistemicFormula::BelievesModal {
            agent: agent.clone(),
            modal: subst_modal(modal, name, value),
        },
        EpistemicFormula::KnowsThat { agent, body } => EpistemicFormula::KnowsThat {
            agent: agent.clone(),
            body: b(body),
        },
        EpistemicFormula::KnowsIf { agent, body } => EpistemicFormula::KnowsIf {
            agent: agent.clone(),
            body: b(body),
        },
        EpistemicFormula::NotKnowsThat { agent, body } => EpistemicFormula::NotKnowsThat {
            agent: agent.clone(),
            body: b(body),
        },
        EpistemicFormula::NotKnowsIf { agent, body } => EpistemicFormula::NotKnowsIf {
            agent: agent.clone(),
            body: b(body),
        },
        EpistemicFormula::KnowsAbout { agent, class, body } => EpistemicFormula::KnowsAbout {
            agent: agent.clone(),
            class: class.clone(),
            body: if class.var == name {
                body.clone()
            } else {
                b(body)
            },
        },
        EpistemicFormula::CertainThat { agent, body } => EpistemicFormula::CertainThat {
            agent: agent.clone(),
            body: b(body),
        },
        EpistemicFormula::CertainAbout { agent, class, body } => EpistemicFormula::CertainAbout {
            agent: agent.clone(),
            class: class.clone(),
            body: if class.var == name {
                body.clone()
            } else {
                b(body)
            },
        },
        EpistemicFormula::UncertainIf { agent, left, right } => EpistemicFormula::UncertainIf {
            agent: agent.clone(),
            left: b(left),
            right: b(right),
        },
        EpistemicFormula::UncertainAbout { agent, class, body } => {
            EpistemicFormula::UncertainAbout {
                agent: agent.clone(),
                class: class.clone(),
                body: if class.var == name {
                    body.clone()
                } else {
                    b(body)
                },
            }
        }
        EpistemicFormula::Degree { pred, agent, body } => EpistemicFormula::Degree {
            pred: *pred,
            agent: agent.clone(),
            body: b(body),
        },
        EpistemicFormula::Exists {
            var,
            restriction,
            body,
        } => {
            if var == name {
                f.clone()
            } else {
                EpistemicFormula::Exists {
                    var: var.clone(),
                    restriction: subst_world(restriction, name, value),
                    body: Box::new(subst_statement(body, name, value)),
                }
            }
        }
        EpistemicFormula::Forall {
            var,
            restriction,
            body,
        } => {
            if var == name {
                f.clone()
            } else {
                EpistemicFormula::Forall {
                    var: var.clone(),
                    restriction: subst_world(restriction, name, value),
                    body: Box::new(subst_statement(body, name, value)),
                }
            }
        }
        EpistemicFormula::And(items) => EpistemicFormula::And(
            items
                .iter()
                .map(|i| subst_statement(i, name, value))
                .collect(),
        ),
        EpistemicFormula::Or(items) => EpistemicFormula::Or(
            items
                .iter()
                .map(|i| subst_statement(i, name, value))
                .collect(),
        ),
        EpistemicFormula::Not(inner) => {
            EpistemicFormula::Not(Box::new(subst_statement(inner, name, value)))
        }
        EpistemicFormula::Implies(a, b2) => EpistemicFormula::Implies(
            Box::new(subst_statement(a, name, value)),
            Box::new(subst_statement(b2, name, value)),
        ),
    }
}

/// Splits a quantifier restriction into the leading class predicate and the
/// remaining guard conjuncts.
pub fn split_class(restriction: &BaseFormula) -> (&str, Vec<&BaseFormula>) {
    match restriction {
        BaseFormula::Pred { name, .. } => (name, Vec::new()),
        BaseFormula::And(items) => match &items[0] {
            BaseFormula::Pred { name, .. } => (name, items[1..].iter().collect()),
            other => panic!("restriction head should be a class atom, got {other:?}"),
        },
        other => panic!("restriction should be a class atom or conjunction, got {other:?}"),
    }
}

/// Everything the brute-force interpreter knows about one (hypothesis,
/// time) pair: the hypothesis's actual world and the agent's weighted
/// hypothetical worlds, both replayed from the initial candidates.
pub struct Interp<'a> {
    pub map: &'a GridMap,
    pub domain: &'a DomainSignature,
    pub thresholds: &'a ThresholdTable,
    pub actual: EnvState,
    pub particles: Vec<(EnvState, f64)>,
}

impl Interp<'_> {
    pub fn degree(&self, body: &BaseFormula) -> f64 {
        self.particles
            .iter()
            .filter(|(s, _)| state_satisfies(self.map, s, body))
            .map(|(_, w)| w)
            .sum()
    }

    pub fn fact(&self, body: &BaseFormula) -> bool {
        state_satisfies(self.map, &self.actual, body)
    }

    pub fn believed(&self, body: &BaseFormula) -> bool {
        self.degree(body) >= self.thresholds.get(ThresholdName::Believes)
    }

    pub fn known(&self, body: &BaseFormula) -> bool {
        self.believed(body) && self.fact(body)
    }

    pub fn members(&self, class: &str) -> &[String] {
        self.domain
            .class_members(class)
            .expect("generated statements only enumerate enumerable classes")
    }

    pub fn eval_modal(&self, m: &ModalFormula) -> bool {
        match m {
            ModalFormula::Graded { word, body } => {
                let d = self.degree(body);
                if *word == ThresholdName::Unlikely {
                    d <= self.thresholds.get(*word)
                } else {
                    d >= self.thresholds.get(*word)
                }
            }
            ModalFormula::More { left, right, .. } => self.degree(left) > self.degree(right),
            ModalFormula::Less { left, right, .. } => self.degree(left) < self.degree(right),
            ModalFormula::MostSup {
                object,
                class,
                body,
                ..
            } => {
                let subject = self.degree(&subst_world(body, &class.var, object));
                self.members(&class.pred)
                    .iter()
                    .filter(|m| *m != object)
                    .all(|m| subject >= self.degree(&subst_world(body, &class.var, m)))
            }
            ModalFormula::LeastSup {
                object,
                class,
                body,
                ..
            } => {
                let subject = self.degree(&subst_world(body, &class.var, object));
                self.members(&class.pred)
                    .iter()
                    .filter(|m| *m != object)
                    .all(|m| subject <= self.degree(&subst_world(body, &class.var, m)))
            }
            ModalFormula::MostStr { pred, body } => {
                let cap = (self.thresholds.alpha_most * self.thresholds.get(*pred)).min(1.0);
                self.degree(body) >= cap
            }
            ModalFormula::LeastStr { pred, body } => {
                let floor = self.thresholds.get(*pred) / self.thresholds.alpha_most;
                self.degree(body) <= floor
            }
        }
    }

    pub fn eval(&self, f: &EpistemicFormula) -> bool {
        match f {
            EpistemicFormula::Believes { body, .. } => self.believed(body),
            EpistemicFormula::BelievesModal { modal, .. } => self.eval_modal(modal),
            EpistemicFormula::KnowsThat { body, .. } => self.known(body),
            EpistemicFormula::KnowsIf { body, .. } => {
                let neg = BaseFormula::Not(Box::new(body.clone()));
                self.known(body) || self.known(&neg)
            }
            EpistemicFormula::NotKnowsThat { body, .. } => !self.believed(body) && self.fact(body),
            EpistemicFormula::NotKnowsIf { body, .. } => {
                let neg = BaseFormula::Not(Box::new(body.clone()));
                !self.known(body) && !self.known(&neg)
            }
            EpistemicFormula::KnowsAbout { class, body, .. } => self
                .members(&class.pred)
                .iter()
                .any(|m| self.known(&subst_world(body, &class.var, m))),
            EpistemicFormula::CertainThat { body, .. } => {
                self.degree(body) >= self.thresholds.get(ThresholdName::Certain)
            }
            EpistemicFormula::CertainAbout { class, body, .. } => {
                let bar = self.thresholds.get(ThresholdName::Certain);
                self.members(&class.pred)
                    .iter()
                    .any(|m| self.degree(&subst_world(body, &class.var, m)) >= bar)
            }
            EpistemicFormula::UncertainIf { left, right, .. } => {
                let bar = self.thresholds.get(ThresholdName::Uncertain);
                self.degree(left) < bar && self.degree(right) < bar
            }
            EpistemicFormula::UncertainAbout { class, body, .. } => {
                let bar = self.thresholds.get(ThresholdName::Uncertain);
                self.members(&class.pred)
                    .iter()
                    .all(|m| self.degree(&subst_world(body, &class.var, m)) < bar)
            }
            EpistemicFormula::Degree { .. } => {
                panic!("degree terms are not statements; the generator never emits them")
            }
            EpistemicFormula::Exists {
                var,
                restriction,
                body,
            } => {
                let (class, guards) = split_class(restriction);
                self.members(class).iter().any(|m| {
                    let ok = guards.iter().all(|g| self.fact(&subst_world(g, var, m)));
                    ok && self.eval(&subst_statement(body, var, m))
                })
            }
            EpistemicFormula::Forall {
                var,
                restriction,
                body,
            } => {
                let (class, guards) = split_class(restriction);
                self.members(class).iter().all(|m| {
                    let ok = guards.iter().all(|g| self.fact(&subst_world(g, var, m)));
                    !ok || self.eval(&subst_statement(body, var, m))
                })
            }
            EpistemicFormula::And(items) => items.iter().all(|i| self.eval(i)),
            EpistemicFormula::Or(items) => items.iter().any(|i| self.eval(i)),
            EpistemicFormula::Not(inner) => !self.eval(inner),
            EpistemicFormula::Implies(a, b) => !self.eval(a) || self.eval(b),
        }
    }
}

pub fn make_interp<'a>(
    posterior: &'a Posterior,
    h: usize,
    t: usize,
    domain: &'a DomainSignature,
    thresholds: &'a ThresholdTable,
) -> Interp<'a> {
    let particles = posterior
        .belief_at(h, t)
        .support()
        .into_iter()
        .map(|(j, w)| (replay(posterior, j, t), w))
        .collect();
    Interp {
        map: &posterior.map,
        domain,
        thresholds,
        actual: replay(posterior, posterior.hypotheses[h].candidate, t),
        particles,
    }
}

pub fn full_domain() -> &'static DomainSignature {
    static DOMAIN: OnceLock<DomainSignature> = OnceLock::new();
    DOMAIN.get_or_init(DomainSignature::doors_keys_gems)
}

/// Mostly-default, sometimes-randomized threshold table, so comparisons get
/// exercised away from the stock cut points too.
pub fn table_from_seed(seed: u32) -> ThresholdTable {
    let mut table = ThresholdTable::default();
    if seed % 4 == 0 {
        return table;
    }
    let mut x = seed | 1;
    for name in ThresholdName::ALL {
        x = x.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
        let v = f64::from(x % 101) / 100.0;
        table.set(name, v).expect("value is in [0, 1]");
    }
    table
}

pub fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
}
