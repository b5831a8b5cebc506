//! Dynamic episode state, actions, transitions, and observations.
//!
//! [`EnvState`] is a small `Copy` value so search and inference can clone
//! states freely. Box contents are part of the state: two hypotheses about
//! what the boxes hold are simply two states that differ in `contents`.
//! [`observe`] masks the contents of unopened boxes, which is all an
//! onlooker (or the agent) cannot see.

use crate::gridworld::map::{Cell, GridMap, KeyColor, MAX_BOXES};

/// What a box holds. `None` is an empty box.
pub type BoxContent = Option<KeyColor>;

/// Movement direction; up is toward row 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    Up,
    Down,
    Left,
    Right,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::Up, Dir::Down, Dir::Left, Dir::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Dir::Up => "up",
            Dir::Down => "down",
            Dir::Left => "left",
            Dir::Right => "right",
        }
    }

    fn offset(self) -> (i16, i16) {
        match self {
            Dir::Up => (0, -1),
            Dir::Down => (0, 1),
            Dir::Left => (-1, 0),
            Dir::Right => (1, 0),
        }
    }
}

/// One unit-cost action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    NoOp,
    Move(Dir),
    /// Open the adjacent box with this index, revealing its content.
    Open(u8),
    /// Take the key on the adjacent cell (an opened box or a floor key).
    PickupKey(Cell),
    /// Unlock the adjacent door with this index, consuming a matching key.
    Unlock(u8),
    /// Collect the adjacent gem with this index; ends the episode.
    Collect(u8),
}

/// Everything that can change during an episode, plus the (possibly
/// hypothetical) box contents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EnvState {
    pub pos: Cell,
    /// Held key count per color, indexed by `KeyColor as usize`.
    pub held: [u8; 4],
    /// Content of box i; meaningful for `i < map.boxes.len()`.
    pub contents: [BoxContent; MAX_BOXES],
    /// Bit i: box i has been opened (stays set forever).
    pub opened: u16,
    /// Bit i: box i's key has been taken out.
    pub content_taken: u16,
    /// Bit j: floor key j has been picked up.
    pub floor_taken: u8,
    /// Bit d: door d has been unlocked.
    pub unlocked: u8,
    /// Bit g: gem g has been collected.
    pub collected: u8,
}

impl EnvState {
    pub fn box_opened(&self, i: usize) -> bool {
        self.opened & (1 << i) != 0
    }

    pub fn box_content_taken(&self, i: usize) -> bool {
        self.content_taken & (1 << i) != 0
    }

    pub fn floor_key_taken(&self, j: usize) -> bool {
        self.floor_taken & (1 << j) != 0
    }

    pub fn door_unlocked(&self, d: usize) -> bool {
        self.unlocked & (1 << d) != 0
    }

    pub fn gem_collected(&self, g: usize) -> bool {
        self.collected & (1 << g) != 0
    }

    /// True once any gem has been collected; no further action has effect.
    pub fn terminal(&self) -> bool {
        self.collected != 0
    }
}

impl GridMap {
    /// Episode start state under a content assignment (one entry per box).
    pub fn initial_state(&self, contents: &[BoxContent]) -> EnvState {
        assert_eq!(
            contents.len(),
            self.boxes.len(),
            "one content entry per box"
        );
        let mut fixed = [None; MAX_BOXES];
        fixed[..contents.len()].copy_from_slice(contents);
        EnvState {
            pos: self.start,
            held: [0; 4],
            contents: fixed,
            opened: 0,
            content_taken: 0,
            floor_taken: 0,
            unlocked: 0,
            collected: 0,
        }
    }
}

fn step(cell: Cell, dir: Dir) -> Option<Cell> {
    let (dx, dy) = dir.offset();
    let x = cell.0 as i16 + dx;
    let y = cell.1 as i16 + dy;
    if x < 0 || y < 0 || x > u8::MAX as i16 || y > u8::MAX as i16 {
        None
    } else {
        Some((x as u8, y as u8))
    }
}

fn adjacent(a: Cell, b: Cell) -> bool {
    let dx = (a.0 as i16 - b.0 as i16).abs();
    let dy = (a.1 as i16 - b.1 as i16).abs();
    dx + dy == 1
}

/// A cell the agent may stand on: floor, a taken floor key's cell, or an
/// unlocked door. Boxes and gems always block.
pub fn enterable(map: &GridMap, state: &EnvState, cell: Cell) -> bool {
    if !map.in_bounds(cell) || map.is_wall(cell) {
        return false;
    }
    if map.box_at(cell).is_some() || map.gem_at(cell).is_some() {
        return false;
    }
    if let Some(j) = map.floor_key_at(cell) {
        return state.floor_key_taken(j);
    }
    if let Some(d) = map.door_at(cell) {
        return state.door_unlocked(d);
    }
    true
}

/// The key available for pickup on `cell`, if any: an untaken floor key or
/// the revealed, untaken content of an opened box.
fn pickup_available(map: &GridMap, state: &EnvState, cell: Cell) -> Option<KeyColor> {
    if let Some(i) = map.box_at(cell) {
        if state.box_opened(i) && !state.box_content_taken(i) {
            return state.contents[i];
        }
        return None;
    }
    if let Some(j) = map.floor_key_at(cell) {
        if !state.floor_key_taken(j) {
            return Some(map.floor_keys[j].0);
        }
    }
    None
}

/// Actions with an effect in `state`, in canonical order: moves, opens,
/// pickups, unlocks, collects, and NoOp last. After the episode ends only
/// NoOp remains.
pub fn valid_actions(map: &GridMap, state: &EnvState) -> Vec<Action> {
    let mut actions = Vec::new();
    if state.terminal() {
        actions.push(Action::NoOp);
        return actions;
    }
    for dir in Dir::ALL {
        if let Some(target) = step(state.pos, dir) {
            if enterable(map, state, target) {
                actions.push(Action::Move(dir));
            }
        }
    }
    for (i, &cell) in map.boxes.iter().enumerate() {
        if adjacent(state.pos, cell) && !state.box_opened(i) {
            actions.push(Action::Open(i as u8));
        }
    }
    // Box pickups in box order, then floor keys in declaration order.
    for &cell in map.boxes.iter() {
        if adjacent(state.pos, cell) && pickup_available(map, state, cell).is_some() {
            actions.push(Action::PickupKey(cell));
        }
    }
    for &(_, cell) in map.floor_keys.iter() {
        if adjacent(state.pos, cell) && pickup_available(map, state, cell).is_some() {
            actions.push(Action::PickupKey(cell));
        }
    }
    for (d, &(color, cell)) in map.doors.iter().enumerate() {
        if adjacent(state.pos, cell)
            && !state.door_unlocked(d)
            && state.held[color as usize] > 0
        {
            actions.push(Action::Unlock(d as u8));
        }
    }
    for (g, &(_, cell)) in map.gems.iter().enumerate() {
        if adjacent(state.pos, cell) {
            actions.push(Action::Collect(g as u8));
        }
    }
    actions.push(Action::NoOp);
    actions
}

/// Applies an action. Total: an action with no effect (blocked move, open on
/// an opened box, anything after the episode ended) returns the state
/// unchanged.
pub fn transition(map: &GridMap, state: &EnvState, action: Action) -> EnvState {
    let mut next = *state;
    if state.terminal() {
        return next;
    }
    match action {
        Action::NoOp => {}
        Action::Move(dir) => {
            if let Some(target) = step(state.pos, dir) {
                if enterable(map, state, target) {
                    next.pos = target;
                }
            }
        }
        Action::Open(i) => {
            let i = i as usize;
            if i < map.boxes.len() && adjacent(state.pos, map.boxes[i]) && !state.box_opened(i) {
                next.opened |= 1 << i;
            }
        }
        Action::PickupKey(cell) => {
            if adjacent(state.pos, cell) {
                if let Some(color) = pickup_available(map, state, cell) {
                    next.held[color as usize] += 1;
                    if let Some(i) = map.box_at(cell) {
                        next.content_taken |= 1 << i;
                    } else if let Some(j) = map.floor_key_at(cell) {
                        next.floor_taken |= 1 << j;
                    }
                }
            }
        }
        Action::Unlock(d) => {
            let d = d as usize;
            if d < map.doors.len() {
                let (color, cell) = map.doors[d];
                if adjacent(state.pos, cell)
                    && !state.door_unlocked(d)
                    && state.held[color as usize] > 0
                {
                    next.unlocked |= 1 << d;
                    next.held[color as usize] -= 1;
                }
            }
        }
        Action::Collect(g) => {
            let g = g as usize;
            if g < map.gems.len() && adjacent(state.pos, map.gems[g].1) {
                next.collected |= 1 << g;
            }
        }
    }
    next
}

/// Box content as seen from outside: hidden until the box is opened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObservedContent {
    Hidden,
    Empty,
    Key(KeyColor),
}

/// The fully observable part of a state. Two states observationally match
/// exactly when they differ only in the contents of still-closed boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Observation {
    pub pos: Cell,
    pub held: [u8; 4],
    pub contents: [ObservedContent; MAX_BOXES],
    pub opened: u16,
    pub content_taken: u16,
    pub floor_taken: u8,
    pub unlocked: u8,
    pub collected: u8,
}

/// Projects a state to what is visible. An opened box's content stays
/// visible forever, even after the key is taken out.
pub fn observe(state: &EnvState) -> Observation {
    let mut contents = [ObservedContent::Hidden; MAX_BOXES];
    for (i, slot) in contents.iter_mut().enumerate() {
        if state.box_opened(i) {
            *slot = match state.contents[i] {
                Some(color) => ObservedContent::Key(color),
                None => ObservedContent::Empty,
            };
        }
    }
    Observation {
        pos: state.pos,
        held: state.held,
        contents,
        opened: state.opened,
        content_taken: state.content_taken,
        floor_taken: state.floor_taken,
        unlocked: state.unlocked,
        collected: state.collected,
    }
}
