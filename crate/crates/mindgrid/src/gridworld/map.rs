//! Static map data: walls and entity placements.
//!
//! A map fixes everything that never changes during an episode: the wall
//! layout, the agent's start cell, and where boxes, gems, doors, and floor
//! keys sit. What changes (open flags, held keys, collected gems, and the
//! hidden box contents) lives in [`crate::gridworld::EnvState`].

use thiserror::Error;

use crate::elot::domain::{ClassSig, DomainSignature};

/// Grid cell as (column, row), zero-based, origin at the top-left.
pub type Cell = (u8, u8);

/// Key and door colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KeyColor {
    Red,
    Blue,
    Green,
    Yellow,
}

impl KeyColor {
    pub const ALL: [KeyColor; 4] = [
        KeyColor::Red,
        KeyColor::Blue,
        KeyColor::Green,
        KeyColor::Yellow,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KeyColor::Red => "red",
            KeyColor::Blue => "blue",
            KeyColor::Green => "green",
            KeyColor::Yellow => "yellow",
        }
    }

    pub fn parse(s: &str) -> Option<KeyColor> {
        KeyColor::ALL.iter().copied().find(|c| c.as_str() == s)
    }

    /// Door constant for this color, e.g. `red_door`.
    pub fn door_name(self) -> &'static str {
        match self {
            KeyColor::Red => "red_door",
            KeyColor::Blue => "blue_door",
            KeyColor::Green => "green_door",
            KeyColor::Yellow => "yellow_door",
        }
    }
}

impl std::fmt::Display for KeyColor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Gem shapes; each shape appears at most once per map, so the shape name
/// doubles as the gem's constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GemKind {
    Triangle,
    Square,
    Hexagon,
    Circle,
}

impl GemKind {
    pub const ALL: [GemKind; 4] = [
        GemKind::Triangle,
        GemKind::Square,
        GemKind::Hexagon,
        GemKind::Circle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GemKind::Triangle => "triangle",
            GemKind::Square => "square",
            GemKind::Hexagon => "hexagon",
            GemKind::Circle => "circle",
        }
    }

    pub fn parse(s: &str) -> Option<GemKind> {
        GemKind::ALL.iter().copied().find(|g| g.as_str() == s)
    }
}

impl std::fmt::Display for GemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const MAX_BOXES: usize = 9;
pub const MAX_FLOOR_KEYS: usize = 8;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("map has no rows")]
    Empty,
    #[error("row {0} has length {1}, expected {2}")]
    RaggedRow(usize, usize, usize),
    #[error("map is {0}x{1}, maximum is 32x32")]
    TooLarge(usize, usize),
    #[error("unknown map symbol `{0}` at ({1}, {2})")]
    UnknownSymbol(char, u8, u8),
    #[error("map needs exactly one `@` start cell, found {0}")]
    StartCount(usize),
    #[error("duplicate gem `{0}`")]
    DuplicateGem(GemKind),
    #[error("duplicate door color `{0}`")]
    DuplicateDoor(KeyColor),
    #[error("box digits must be 1..=n without gaps; missing `{0}`")]
    BoxGap(usize),
    #[error("too many floor keys: {0}, maximum is {MAX_FLOOR_KEYS}")]
    TooManyFloorKeys(usize),
    #[error("map has no gems")]
    NoGems,
}

/// Immutable map layout.
#[derive(Debug, Clone)]
pub struct GridMap {
    pub width: u8,
    pub height: u8,
    walls: Vec<bool>,
    pub start: Cell,
    /// Box cells; `box{i+1}` in the surface language.
    pub boxes: Vec<Cell>,
    /// Gems with their shapes; goal `g` means collecting `gems[g]`.
    pub gems: Vec<(GemKind, Cell)>,
    /// Locked doors, at most one per color.
    pub doors: Vec<(KeyColor, Cell)>,
    /// Keys lying on the floor at episode start.
    pub floor_keys: Vec<(KeyColor, Cell)>,
}

impl GridMap {
    /// Parses the ASCII picture format:
    ///
    /// ```text
    /// #########
    /// #@..1..T#
    /// #...#...#
    /// #r..2..B#
    /// #########
    /// ```
    ///
    /// `#` wall, `.` floor, `@` start, digits boxes, `T`/`S`/`H`/`C` gems
    /// (triangle, square, hexagon, circle), `R`/`B`/`G`/`Y` locked doors,
    /// `r`/`b`/`g`/`y` floor keys. Rows must be equally long.
    pub fn from_ascii(text: &str) -> Result<GridMap, MapError> {
        let rows: Vec<&str> = text
            .lines()
            .map(str::trim_end)
            .filter(|l| !l.is_empty())
            .collect();
        if rows.is_empty() {
            return Err(MapError::Empty);
        }
        let width = rows[0].chars().count();
        for (i, row) in rows.iter().enumerate() {
            let len = row.chars().count();
            if len != width {
                return Err(MapError::RaggedRow(i, len, width));
            }
        }
        if width > 32 || rows.len() > 32 {
            return Err(MapError::TooLarge(width, rows.len()));
        }

        let height = rows.len();
        let mut walls = vec![false; width * height];
        let mut starts = Vec::new();
        let mut numbered_boxes: Vec<(usize, Cell)> = Vec::new();
        let mut gems = Vec::new();
        let mut doors = Vec::new();
        let mut floor_keys = Vec::new();

        for (y, row) in rows.iter().enumerate() {
            for (x, ch) in row.chars().enumerate() {
                let cell = (x as u8, y as u8);
                match ch {
                    '#' => walls[y * width + x] = true,
                    '.' => {}
                    '@' => starts.push(cell),
                    '1'..='9' => {
                        numbered_boxes.push((ch as usize - '1' as usize, cell));
                    }
                    'T' => gems.push((GemKind::Triangle, cell)),
                    'S' => gems.push((GemKind::Square, cell)),
                    'H' => gems.push((GemKind::Hexagon, cell)),
                    'C' => gems.push((GemKind::Circle, cell)),
                    'R' => doors.push((KeyColor::Red, cell)),
                    'B' => doors.push((KeyColor::Blue, cell)),
                    'G' => doors.push((KeyColor::Green, cell)),
                    'Y' => doors.push((KeyColor::Yellow, cell)),
                    'r' => floor_keys.push((KeyColor::Red, cell)),
                    'b' => floor_keys.push((KeyColor::Blue, cell)),
                    'g' => floor_keys.push((KeyColor::Green, cell)),
                    'y' => floor_keys.push((KeyColor::Yellow, cell)),
                    other => return Err(MapError::UnknownSymbol(other, cell.0, cell.1)),
                }
            }
        }

        if starts.len() != 1 {
            return Err(MapError::StartCount(starts.len()));
        }
        for kind in GemKind::ALL {
            if gems.iter().filter(|(k, _)| *k == kind).count() > 1 {
                return Err(MapError::DuplicateGem(kind));
            }
        }
        if gems.is_empty() {
            return Err(MapError::NoGems);
        }
        for color in KeyColor::ALL {
            if doors.iter().filter(|(c, _)| *c == color).count() > 1 {
                return Err(MapError::DuplicateDoor(color));
            }
        }
        if floor_keys.len() > MAX_FLOOR_KEYS {
            return Err(MapError::TooManyFloorKeys(floor_keys.len()));
        }
        numbered_boxes.sort();
        for (want, (idx, _)) in numbered_boxes.iter().enumerate() {
            if *idx != want {
                return Err(MapError::BoxGap(want + 1));
            }
        }
        let boxes = numbered_boxes.into_iter().map(|(_, cell)| cell).collect();

        Ok(GridMap {
            width: width as u8,
            height: height as u8,
            walls,
            start: starts[0],
            boxes,
            gems,
            doors,
            floor_keys,
        })
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.0 < self.width && cell.1 < self.height
    }

    pub fn is_wall(&self, cell: Cell) -> bool {
        self.walls[cell.1 as usize * self.width as usize + cell.0 as usize]
    }

    pub fn box_at(&self, cell: Cell) -> Option<usize> {
        self.boxes.iter().position(|&c| c == cell)
    }

    pub fn gem_at(&self, cell: Cell) -> Option<usize> {
        self.gems.iter().position(|&(_, c)| c == cell)
    }

    pub fn door_at(&self, cell: Cell) -> Option<usize> {
        self.doors.iter().position(|&(_, c)| c == cell)
    }

    pub fn floor_key_at(&self, cell: Cell) -> Option<usize> {
        self.floor_keys.iter().position(|&(_, c)| c == cell)
    }

    pub fn gem_index(&self, kind: GemKind) -> Option<usize> {
        self.gems.iter().position(|&(k, _)| k == kind)
    }

    /// Statement vocabulary restricted to this map's entities: only the
    /// boxes, gems, and doors actually present are nameable.
    pub fn domain_signature(&self) -> DomainSignature {
        let mut domain = DomainSignature::doors_keys_gems();
        let trim = |class: &mut ClassSig, members: Vec<String>| class.members = members;
        trim(
            domain.classes.get_mut("box").expect("box class"),
            (1..=self.boxes.len()).map(|i| format!("box{i}")).collect(),
        );
        trim(
            domain.classes.get_mut("gem").expect("gem class"),
            self.gems.iter().map(|(k, _)| k.as_str().to_owned()).collect(),
        );
        trim(
            domain.classes.get_mut("door").expect("door class"),
            self.doors
                .iter()
                .map(|(c, _)| c.door_name().to_owned())
                .collect(),
        );
        domain
    }
}
