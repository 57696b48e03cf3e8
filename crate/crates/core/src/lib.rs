//! Snake Story: a snake game in which eating candies picks how an AI-assisted
//! story continues, plus the tooling to log, replay, analyse and simulate it.
//!
//! The crate is organised by concern:
//!
//! - [`engine`]: deterministic grid game (snake, candies, obstacles, lives)
//! - [`provider`]: text generation, HTTP or offline
//! - [`orchestrator`]: one session of either version, writing its log
//! - [`log`]: the plain-text session log format, parser, writer and replay
//! - [`analysis`]: usage statistics, Wilcoxon signed-rank, MTLD, sentence overlap
//! - [`sim`]: scripted players for studying how candy effects bias choices

pub mod analysis;
pub mod clock;
pub mod config;
pub mod engine;
pub mod log;
pub mod orchestrator;
pub mod provider;
pub mod rng;
pub mod script;
pub mod sim;
pub mod story;

pub use clock::{Clock, ManualClock, SystemClock};
pub use config::GameConfig;
pub use engine::{Candy, CandyKind, Direction, GameState, GridPosition, OptionSlot, Phase, TurnEvent};
pub use log::{parse_log, write_trace, SessionTrace};
pub use orchestrator::{Choice, Session, SessionError, SessionStatus, StoryResult, TickInput};
pub use provider::{ProviderConfig, TextOption, TextProvider};
pub use story::SessionVersion;
