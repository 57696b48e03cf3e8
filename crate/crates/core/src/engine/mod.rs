//! Deterministic state machine for the game version.
//!
//! All randomness comes from the state's own [`DrawStream`]; time only enters
//! through [`GameState::advance_pause`] and one call to [`GameState::step`] per tick.

mod placement;
mod types;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::config::{ConfigError, GameConfig, BLACK_CANDY_OBSTACLES};
use crate::provider::TextOption;
use crate::rng::DrawStream;

pub use placement::{first_step_towards, flood_fill, respawn_layout};
pub use types::{
    Candy, CandyKind, Direction, GridPosition, LifeLossCause, OptionSlot, Phase, Snake, TurnEvent,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("operation requires phase {expected}, but the game is {actual:?}")]
    Phase { expected: &'static str, actual: Phase },
    #[error("not enough reachable free tiles: need {needed}, have {available}")]
    Jammed { needed: usize, available: usize },
    #[error("option in slot {slot} has temperature {found}, expected {expected}")]
    SlotTemperature { slot: u8, found: f64, expected: f64 },
    #[error("self-writing has not been unlocked this turn")]
    SelfWriteLocked,
    #[error("no self-written candy is on the map")]
    NoSelfWriteCandy,
    #[error("state consistency: {0}")]
    Consistency(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub config: GameConfig,
    pub snake: Snake,
    pub candies: Vec<Candy>,
    pub obstacles: BTreeSet<GridPosition>,
    pub lives: u32,
    /// Completed turns, i.e. candies eaten.
    pub turn_index: u32,
    pub phase: Phase,
    pub eaten_counts: BTreeMap<CandyKind, u32>,
    /// Set by a Blue candy; a Yellow candy spawns with the next pair of options.
    pub self_write_unlocked: bool,
    /// Obstacles that could not be placed for lack of room.
    pub obstacle_shortfall: u32,
    pub ticks: u64,
    grace_ticks: u32,
    vacated_tail: Option<GridPosition>,
    rng: DrawStream,
}

impl GameState {
    /// Fresh game: snake on the centre row heading Right, no candies or obstacles,
    /// waiting for the first pair of texts.
    pub fn new(config: GameConfig, seed: u64) -> Result<Self, EngineError> {
        config.validate()?;
        let centre = config.map_size / 2;
        let body = (0..config.initial_snake_length)
            .map(|i| GridPosition::new(centre - i, centre))
            .collect();
        Ok(Self {
            snake: Snake { body, heading: Direction::Right },
            candies: Vec::new(),
            obstacles: BTreeSet::new(),
            lives: config.initial_lives,
            turn_index: 0,
            phase: Phase::AwaitingTexts,
            eaten_counts: BTreeMap::new(),
            self_write_unlocked: false,
            obstacle_shortfall: 0,
            ticks: 0,
            grace_ticks: 0,
            vacated_tail: None,
            rng: DrawStream::new(seed),
            config,
        })
    }

    pub fn is_terminal(&self) -> bool {
        self.lives == 0
    }

    pub fn total_eaten(&self) -> u32 {
        self.eaten_counts.values().sum()
    }

    pub fn eaten(&self, kind: CandyKind) -> u32 {
        self.eaten_counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn candy_in_slot(&self, slot: OptionSlot) -> Option<&Candy> {
        self.candies.iter().find(|c| c.slot == slot)
    }

    fn candy_at(&self, pos: GridPosition) -> Option<&Candy> {
        self.candies.iter().find(|c| c.position == pos)
    }

    /// Not snake, obstacle or candy.
    pub fn is_free(&self, pos: GridPosition) -> bool {
        !self.snake.occupies(pos) && !self.obstacles.contains(&pos) && self.candy_at(pos).is_none()
    }

    pub fn free_tiles(&self) -> Vec<GridPosition> {
        self.tiles().filter(|p| self.is_free(*p)).collect()
    }

    fn tiles(&self) -> impl Iterator<Item = GridPosition> {
        let size = self.config.map_size;
        (0..size).flat_map(move |y| (0..size).map(move |x| GridPosition::new(x, y)))
    }

    /// Tiles the head can reach if the body stayed where it is. Candies are passable.
    fn reachable_from_head(&self) -> Vec<bool> {
        let head = self.snake.head();
        flood_fill(self.config.map_size, head, |p| {
            !self.obstacles.contains(&p) && !self.snake.body[1..].contains(&p)
        })
    }

    /// Whether every candy can be reached from the head with the body treated as walls.
    pub fn candies_reachable(&self) -> bool {
        let seen = self.reachable_from_head();
        self.candies
            .iter()
            .all(|c| seen[c.position.index(self.config.map_size)])
    }

    /// Places this turn's candies: a pool-one kind carrying `option_a`, a pool-two
    /// kind carrying `option_b`, and a Yellow candy when self-writing was unlocked.
    ///
    /// Draw order: pool-one kind, its tile, pool-two kind, its tile, Yellow tile.
    /// Tiles are drawn from the free tiles reachable from the head, row-major.
    pub fn spawn_turn_candies(
        &mut self,
        option_a: &TextOption,
        option_b: &TextOption,
        self_text: Option<String>,
    ) -> Result<(), EngineError> {
        if self.phase != Phase::AwaitingTexts {
            return Err(EngineError::Phase { expected: "AwaitingTexts", actual: self.phase });
        }
        for (slot, option, expected) in [
            (0u8, option_a, self.config.temperature_low),
            (1u8, option_b, self.config.temperature_high),
        ] {
            if option.temperature != expected {
                return Err(EngineError::SlotTemperature { slot, found: option.temperature, expected });
            }
        }
        let with_yellow = self.self_write_unlocked;
        if self_text.is_some() && !with_yellow {
            return Err(EngineError::SelfWriteLocked);
        }

        let seen = self.reachable_from_head();
        let head = self.snake.head();
        let mut candidates: Vec<GridPosition> = self
            .tiles()
            .filter(|p| *p != head && seen[p.index(self.config.map_size)] && self.is_free(*p))
            .collect();
        let needed = if with_yellow { 3 } else { 2 };
        if candidates.len() < needed {
            return Err(EngineError::Jammed { needed, available: candidates.len() });
        }

        let mut spawned = Vec::with_capacity(needed);
        for (slot, pool, text) in [
            (OptionSlot::PoolOne, &CandyKind::POOL_ONE, &option_a.text),
            (OptionSlot::PoolTwo, &CandyKind::POOL_TWO, &option_b.text),
        ] {
            let kind = pool[self.rng.pick(pool.len())];
            let position = candidates.remove(self.rng.pick(candidates.len()));
            spawned.push(Candy { kind, position, slot, text: text.clone() });
        }
        if with_yellow {
            let position = candidates.remove(self.rng.pick(candidates.len()));
            spawned.push(Candy {
                kind: CandyKind::Yellow,
                position,
                slot: OptionSlot::SelfWritten,
                text: self_text.map(|t| t.trim_end().to_string()).unwrap_or_default(),
            });
        }
        self.candies = spawned;
        self.self_write_unlocked = false;
        self.phase = Phase::Paused {
            remaining_ms: self.config.pause_ms(with_yellow),
            self_write_enabled: with_yellow,
        };
        Ok(())
    }

    /// Replaces the text on the Yellow candy. Empty text leaves it inert.
    pub fn set_self_text(&mut self, text: &str) -> Result<(), EngineError> {
        let candy = self
            .candies
            .iter_mut()
            .find(|c| c.kind == CandyKind::Yellow)
            .ok_or(EngineError::NoSelfWriteCandy)?;
        candy.text = text.trim_end().to_string();
        Ok(())
    }

    /// Counts the pause down; returns the milliseconds left (0 once Moving).
    pub fn advance_pause(&mut self, elapsed_ms: u64) -> Result<u64, EngineError> {
        match self.phase {
            Phase::Paused { remaining_ms, self_write_enabled } => {
                let left = remaining_ms.saturating_sub(elapsed_ms);
                self.phase = if left == 0 {
                    Phase::Moving
                } else {
                    Phase::Paused { remaining_ms: left, self_write_enabled }
                };
                Ok(left)
            }
            actual => Err(EngineError::Phase { expected: "Paused", actual }),
        }
    }

    /// Ends the pause early; returns the unspent milliseconds.
    pub fn end_pause(&mut self) -> Result<u64, EngineError> {
        match self.phase {
            Phase::Paused { remaining_ms, .. } => {
                self.phase = Phase::Moving;
                Ok(remaining_ms)
            }
            actual => Err(EngineError::Phase { expected: "Paused", actual }),
        }
    }

    /// One movement tick. A steer that reverses the heading is ignored.
    pub fn step(&mut self, steer: Option<Direction>) -> Result<Vec<TurnEvent>, EngineError> {
        if self.phase != Phase::Moving {
            return Err(EngineError::Phase { expected: "Moving", actual: self.phase });
        }
        self.ticks += 1;
        if let Some(dir) = steer {
            if dir != self.snake.heading.opposite() {
                self.snake.heading = dir;
            }
        }

        let size = self.config.map_size;
        let len = self.snake.len();
        let next = self.snake.head().step(self.snake.heading, size);
        let cause = match next {
            None => Some(LifeLossCause::WallHit),
            Some(p) if self.obstacles.contains(&p) => Some(LifeLossCause::ObstacleHit),
            // The tail tile is vacated on this same tick.
            Some(p) if self.snake.body[..len - 1].contains(&p) => Some(LifeLossCause::SelfHit),
            Some(_) => None,
        };

        if let Some(cause) = cause {
            if self.grace_ticks > 0 {
                self.grace_ticks -= 1;
                return Ok(Vec::new());
            }
            return Ok(self.lose_life(cause));
        }
        self.grace_ticks = 0;

        let next = next.expect("collision-free move has a target");
        self.snake.body.insert(0, next);
        self.vacated_tail = self.snake.body.pop();

        let target = self.candy_at(next).filter(|c| !c.is_inert()).cloned();
        let events = match target {
            Some(candy) => self.apply_candy_effect(&candy)?,
            None => Vec::new(),
        };
        self.vacated_tail = None;
        Ok(events)
    }

    fn lose_life(&mut self, cause: LifeLossCause) -> Vec<TurnEvent> {
        self.lives = self.lives.saturating_sub(1);
        let mut events = vec![TurnEvent::LifeLost { cause }];
        if self.lives == 0 {
            self.phase = Phase::Ended;
            events.push(TurnEvent::GameEnded);
            return events;
        }
        if self.respawn().is_err() {
            events.extend(self.abandon());
        }
        events
    }

    /// Puts the snake back near the centre with its length preserved and one
    /// tick of grace against an immediate second collision.
    fn respawn(&mut self) -> Result<(), EngineError> {
        let size = self.config.map_size;
        let obstacles = &self.obstacles;
        let candies: Vec<GridPosition> = self.candies.iter().map(|c| c.position).collect();
        let blocked = |p: GridPosition| obstacles.contains(&p) || candies.contains(&p);
        let accept = |body: &[GridPosition]| {
            let seen = flood_fill(size, body[0], |p| !obstacles.contains(&p) && !body[1..].contains(&p));
            candies.iter().all(|c| seen[c.index(size)])
        };
        let (body, heading) = respawn_layout(size, self.snake.len(), blocked, accept).ok_or(
            EngineError::Jammed { needed: self.snake.len(), available: self.free_tiles().len() },
        )?;
        self.snake = Snake { body, heading };
        self.grace_ticks = 1;
        Ok(())
    }

    /// Applies what eating `candy` does. The head must have just moved onto it.
    ///
    /// Every kind grows the snake by one and appends its text; then White does
    /// nothing more, Black drops extra obstacles, Red costs a life, Green gives
    /// one, Blue unlocks self-writing and Yellow only contributes its text. The
    /// other candies disappear and the turn closes with the per-turn obstacles.
    pub fn apply_candy_effect(&mut self, candy: &Candy) -> Result<Vec<TurnEvent>, EngineError> {
        if !self.candies.contains(candy) {
            return Err(EngineError::Consistency(format!(
                "{} candy at {} is not on the map",
                candy.kind, candy.position
            )));
        }
        if self.snake.head() != candy.position {
            return Err(EngineError::Consistency(format!(
                "head is at {}, not on the candy at {}",
                self.snake.head(),
                candy.position
            )));
        }
        let tail = self.vacated_tail.take().ok_or_else(|| {
            EngineError::Consistency("candy reached without a movement tick".into())
        })?;

        let mut events = vec![
            TurnEvent::CandyEaten { kind: candy.kind, slot: candy.slot },
            TurnEvent::TextAppended { text: candy.text.clone() },
        ];
        self.candies.clear();
        self.snake.body.push(tail);
        *self.eaten_counts.entry(candy.kind).or_insert(0) += 1;

        match candy.kind {
            CandyKind::White | CandyKind::Yellow => {}
            CandyKind::Black => {
                let count = self.add_obstacles(BLACK_CANDY_OBSTACLES);
                events.push(TurnEvent::ObstaclesAdded { count });
            }
            CandyKind::Red => {
                self.lives = self.lives.saturating_sub(1);
                events.push(TurnEvent::LifeLost { cause: LifeLossCause::RedCandy });
            }
            CandyKind::Green => {
                self.lives += 1;
                events.push(TurnEvent::LifeGained);
            }
            CandyKind::Blue => {
                self.self_write_unlocked = true;
                events.push(TurnEvent::SelfWriteUnlocked);
            }
        }

        self.turn_index += 1;
        let count = self.add_obstacles(self.config.obstacles_per_turn);
        events.push(TurnEvent::ObstaclesAdded { count });

        if self.lives == 0 {
            self.phase = Phase::Ended;
            events.push(TurnEvent::GameEnded);
        } else {
            self.phase = Phase::AwaitingTexts;
        }
        Ok(events)
    }

    /// Places up to `n` obstacles on free tiles, returning how many fit.
    ///
    /// Each placement draws a tile from the free tiles in row-major order. A tile
    /// that would cut the head off from a candy is discarded and another drawn.
    /// Anything that cannot be placed is added to `obstacle_shortfall`.
    pub fn add_obstacles(&mut self, n: u32) -> u32 {
        let mut placed = 0;
        for _ in 0..n {
            let mut candidates = self.free_tiles();
            loop {
                if candidates.is_empty() {
                    break;
                }
                let idx = self.rng.pick(candidates.len());
                let pos = candidates[idx];
                self.obstacles.insert(pos);
                if self.candies_reachable() {
                    placed += 1;
                    break;
                }
                self.obstacles.remove(&pos);
                candidates.remove(idx);
            }
        }
        self.obstacle_shortfall += n - placed;
        placed
    }

    /// Ends the game without a collision, e.g. when the board is jammed or the
    /// player walked away. Lives drop to zero so the end rule stays uniform.
    pub fn abandon(&mut self) -> Vec<TurnEvent> {
        if self.phase == Phase::Ended {
            return Vec::new();
        }
        self.lives = 0;
        self.phase = Phase::Ended;
        vec![TurnEvent::GameEnded]
    }

    /// Checks every structural invariant; used by tests and the simulator.
    pub fn check_invariants(&self) -> Result<(), String> {
        let size = self.config.map_size;
        if (self.phase == Phase::Ended) != (self.lives == 0) {
            return Err(format!("phase {:?} with {} lives", self.phase, self.lives));
        }
        let expected_len = self.config.initial_snake_length + self.total_eaten();
        if self.snake.len() as u32 != expected_len {
            return Err(format!("snake length {} != {}", self.snake.len(), expected_len));
        }
        let expected_obstacles = self.config.obstacles_per_turn * self.turn_index
            + BLACK_CANDY_OBSTACLES * self.eaten(CandyKind::Black);
        if self.obstacles.len() as u32 + self.obstacle_shortfall != expected_obstacles {
            return Err(format!(
                "{} obstacles + {} shortfall != {}",
                self.obstacles.len(),
                self.obstacle_shortfall,
                expected_obstacles
            ));
        }
        let mut body = BTreeSet::new();
        for p in &self.snake.body {
            if p.x >= size || p.y >= size {
                return Err(format!("body tile {p} off the map"));
            }
            if !body.insert(*p) {
                return Err(format!("body overlaps itself at {p}"));
            }
            if self.obstacles.contains(p) {
                return Err(format!("body on obstacle at {p}"));
            }
        }
        if self.candies.len() > 3 {
            return Err(format!("{} candies on the map", self.candies.len()));
        }
        let mut slots = BTreeSet::new();
        let mut spots = BTreeSet::new();
        for c in &self.candies {
            if !slots.insert(c.slot) {
                return Err(format!("two candies in slot {:?}", c.slot));
            }
            if !spots.insert(c.position) {
                return Err(format!("two candies at {}", c.position));
            }
            if !c.kind.fits_slot(c.slot) {
                return Err(format!("{} candy in slot {:?}", c.kind, c.slot));
            }
            if self.obstacles.contains(&c.position) {
                return Err(format!("candy on obstacle at {}", c.position));
            }
            // The snake may slide over a Yellow candy that has no text yet.
            if body.contains(&c.position) && !c.is_inert() && c.kind != CandyKind::Yellow {
                return Err(format!("candy under the snake at {}", c.position));
            }
        }
        Ok(())
    }
}
