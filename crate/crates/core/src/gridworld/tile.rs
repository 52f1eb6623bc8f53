use serde::{Deserialize, Serialize};

/// Contents of one grid cell. The discriminant is the observation channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum TileKind {
    Floor = 0,
    Wall = 1,
    LaPellet = 2,
    IaPellet = 3,
    Button = 4,
    DoorClosed = 5,
    DoorOpen = 6,
    LearningAgent = 7,
    IndependentAgent = 8,
}

impl TileKind {
    pub const COUNT: usize = 9;

    pub const ALL: [TileKind; Self::COUNT] = [
        TileKind::Floor,
        TileKind::Wall,
        TileKind::LaPellet,
        TileKind::IaPellet,
        TileKind::Button,
        TileKind::DoorClosed,
        TileKind::DoorOpen,
        TileKind::LearningAgent,
        TileKind::IndependentAgent,
    ];

    #[inline]
    pub fn channel(self) -> usize {
        self as usize
    }

    pub fn from_channel(c: usize) -> Option<Self> {
        Self::ALL.get(c).copied()
    }

    /// Whether an agent may stand on this tile.
    pub fn walkable(self) -> bool {
        matches!(
            self,
            TileKind::Floor | TileKind::LaPellet | TileKind::IaPellet | TileKind::Button | TileKind::DoorOpen
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            TileKind::Floor => "floor",
            TileKind::Wall => "wall",
            TileKind::LaPellet => "la_pellet",
            TileKind::IaPellet => "ia_pellet",
            TileKind::Button => "button",
            TileKind::DoorClosed => "door_closed",
            TileKind::DoorOpen => "door_open",
            TileKind::LearningAgent => "learning_agent",
            TileKind::IndependentAgent => "independent_agent",
        }
    }

    /// Single character used by text renders.
    pub fn glyph(self) -> char {
        match self {
            TileKind::Floor => '.',
            TileKind::Wall => '#',
            TileKind::LaPellet => 'l',
            TileKind::IaPellet => 'i',
            TileKind::Button => 'B',
            TileKind::DoorClosed => 'D',
            TileKind::DoorOpen => '/',
            TileKind::LearningAgent => 'L',
            TileKind::IndependentAgent => 'I',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentId {
    Learning,
    Independent,
}

impl AgentId {
    pub fn index(self) -> usize {
        match self {
            AgentId::Learning => 0,
            AgentId::Independent => 1,
        }
    }

    pub fn other(self) -> Self {
        match self {
            AgentId::Learning => AgentId::Independent,
            AgentId::Independent => AgentId::Learning,
        }
    }

    pub fn tile(self) -> TileKind {
        match self {
            AgentId::Learning => TileKind::LearningAgent,
            AgentId::Independent => TileKind::IndependentAgent,
        }
    }

    pub fn pellet(self) -> TileKind {
        match self {
            AgentId::Learning => TileKind::LaPellet,
            AgentId::Independent => TileKind::IaPellet,
        }
    }
}

/// Shared action set of both agents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
    NoOp = 4,
}

impl Action {
    pub const COUNT: usize = 5;
    pub const ALL: [Action; Self::COUNT] = [Action::Up, Action::Down, Action::Left, Action::Right, Action::NoOp];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Panics if `i >= Action::COUNT`.
    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    /// Grid displacement `(dx, dy)`; `y` grows southwards.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Action::Up => (0, -1),
            Action::Down => (0, 1),
            Action::Left => (-1, 0),
            Action::Right => (1, 0),
            Action::NoOp => (0, 0),
        }
    }
}

/// Compass heading, kept for rendering only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facing {
    North,
    South,
    West,
    East,
}

impl Facing {
    pub fn after(self, action: Action) -> Self {
        match action {
            Action::Up => Facing::North,
            Action::Down => Facing::South,
            Action::Left => Facing::West,
            Action::Right => Facing::East,
            Action::NoOp => self,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, action: Action) -> Self {
        let (dx, dy) = action.delta();
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn chebyshev(self, other: Pos) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}
