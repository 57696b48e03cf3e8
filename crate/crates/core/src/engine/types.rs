use std::fmt;

use serde::{Deserialize, Serialize};

/// A tile on the square map; `x` is the column, `y` the row (0 at the top).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridPosition {
    pub x: u32,
    pub y: u32,
}

impl GridPosition {
    pub const fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    /// Neighbour one tile towards `dir`, or `None` when that leaves the map.
    pub fn step(self, dir: Direction, map_size: u32) -> Option<GridPosition> {
        let (dx, dy) = dir.delta();
        let x = self.x as i64 + dx;
        let y = self.y as i64 + dy;
        if x < 0 || y < 0 || x >= map_size as i64 || y >= map_size as i64 {
            None
        } else {
            Some(GridPosition::new(x as u32, y as u32))
        }
    }

    pub fn manhattan(self, other: GridPosition) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    /// Row-major index on a map of the given size.
    pub fn index(self, map_size: u32) -> usize {
        (self.y * map_size + self.x) as usize
    }
}

impl fmt::Display for GridPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    /// Fixed exploration order used wherever ties must break deterministically.
    pub const ORDER: [Direction; 4] = [Direction::Up, Direction::Right, Direction::Down, Direction::Left];

    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::Up => (0, -1),
            Direction::Down => (0, 1),
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "up" | "u" | "w" => Ok(Direction::Up),
            "down" | "d" | "s" => Ok(Direction::Down),
            "left" | "l" | "a" => Ok(Direction::Left),
            "right" | "r" => Ok(Direction::Right),
            other => Err(format!("unknown direction {other:?}")),
        }
    }
}

/// The six candy kinds. The discriminant is the id written to session logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandyKind {
    White = 0,
    Black = 1,
    Red = 2,
    Green = 3,
    Blue = 4,
    Yellow = 5,
}

impl CandyKind {
    pub const ALL: [CandyKind; 6] = [
        CandyKind::White,
        CandyKind::Black,
        CandyKind::Red,
        CandyKind::Green,
        CandyKind::Blue,
        CandyKind::Yellow,
    ];

    /// Neutral and negative effects; carries the low-temperature text.
    pub const POOL_ONE: [CandyKind; 3] = [CandyKind::White, CandyKind::Black, CandyKind::Red];
    /// Neutral and positive effects; carries the high-temperature text.
    pub const POOL_TWO: [CandyKind; 3] = [CandyKind::White, CandyKind::Green, CandyKind::Blue];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<CandyKind> {
        CandyKind::ALL.get(id as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            CandyKind::White => "white",
            CandyKind::Black => "black",
            CandyKind::Red => "red",
            CandyKind::Green => "green",
            CandyKind::Blue => "blue",
            CandyKind::Yellow => "yellow",
        }
    }

    /// Whether this kind may carry the text for `slot`.
    pub fn fits_slot(self, slot: OptionSlot) -> bool {
        match slot {
            OptionSlot::PoolOne => CandyKind::POOL_ONE.contains(&self),
            OptionSlot::PoolTwo => CandyKind::POOL_TWO.contains(&self),
            OptionSlot::SelfWritten => self == CandyKind::Yellow,
        }
    }
}

impl fmt::Display for CandyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which text a candy carries: 0 = low-temperature option, 1 = high-temperature
/// option, 2 = the player's own text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum OptionSlot {
    PoolOne = 0,
    PoolTwo = 1,
    SelfWritten = 2,
}

impl OptionSlot {
    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(index: u8) -> Option<OptionSlot> {
        match index {
            0 => Some(OptionSlot::PoolOne),
            1 => Some(OptionSlot::PoolTwo),
            2 => Some(OptionSlot::SelfWritten),
            _ => None,
        }
    }
}

impl From<OptionSlot> for u8 {
    fn from(slot: OptionSlot) -> u8 {
        slot.index()
    }
}

impl TryFrom<u8> for OptionSlot {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        OptionSlot::from_index(value).ok_or_else(|| format!("option slot {value} out of range"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candy {
    pub kind: CandyKind,
    pub position: GridPosition,
    pub slot: OptionSlot,
    pub text: String,
}

impl Candy {
    /// A Yellow candy does nothing until the player has typed something.
    pub fn is_inert(&self) -> bool {
        self.kind == CandyKind::Yellow && self.text.trim().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snake {
    /// Head first.
    pub body: Vec<GridPosition>,
    pub heading: Direction,
}

impl Snake {
    pub fn head(&self) -> GridPosition {
        self.body[0]
    }

    pub fn len(&self) -> usize {
        self.body.len()
    }

    pub fn is_empty(&self) -> bool {
        self.body.is_empty()
    }

    pub fn occupies(&self, pos: GridPosition) -> bool {
        self.body.contains(&pos)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifeLossCause {
    RedCandy,
    WallHit,
    SelfHit,
    ObstacleHit,
}

/// Everything observable that happens during one engine transition, in causal order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TurnEvent {
    CandyEaten { kind: CandyKind, slot: OptionSlot },
    LifeLost { cause: LifeLossCause },
    LifeGained,
    ObstaclesAdded { count: u32 },
    SelfWriteUnlocked,
    TextAppended { text: String },
    GameEnded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum Phase {
    /// Board frozen while the player reads the new options.
    Paused { remaining_ms: u64, self_write_enabled: bool },
    Moving,
    /// Waiting for the next pair of texts.
    AwaitingTexts,
    Ended,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_ids_are_stable() {
        for (i, kind) in CandyKind::ALL.iter().enumerate() {
            assert_eq!(kind.id() as usize, i);
            assert_eq!(CandyKind::from_id(i as u8), Some(*kind));
        }
        assert_eq!(CandyKind::from_id(6), None);
    }

    #[test]
    fn pools_match_slots() {
        assert!(CandyKind::White.fits_slot(OptionSlot::PoolOne));
        assert!(CandyKind::White.fits_slot(OptionSlot::PoolTwo));
        assert!(CandyKind::Red.fits_slot(OptionSlot::PoolOne));
        assert!(!CandyKind::Red.fits_slot(OptionSlot::PoolTwo));
        assert!(CandyKind::Blue.fits_slot(OptionSlot::PoolTwo));
        assert!(!CandyKind::Yellow.fits_slot(OptionSlot::PoolOne));
        assert!(CandyKind::Yellow.fits_slot(OptionSlot::SelfWritten));
    }

    #[test]
    fn step_respects_walls() {
        let corner = GridPosition::new(0, 0);
        assert_eq!(corner.step(Direction::Left, 15), None);
        assert_eq!(corner.step(Direction::Up, 15), None);
        assert_eq!(corner.step(Direction::Right, 15), Some(GridPosition::new(1, 0)));
        assert_eq!(GridPosition::new(14, 3).step(Direction::Right, 15), None);
    }
}
