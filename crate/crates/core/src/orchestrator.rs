//! One co-writing session, for either version.
//!
//! A session owns its story, the optional game state, the text provider handle
//! and an append-only log. Every mutation goes through `&mut self`, so the
//! owner serializes commands simply by holding the session.

use std::collections::BTreeMap;
use std::sync::Arc;

use chrono::{NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

use crate::clock::Clock;
use crate::config::GameConfig;
use crate::engine::{CandyKind, Direction, EngineError, GameState, OptionSlot, Phase, TurnEvent};
use crate::log::{LogEvent, LogPayload, LogWriter, OptionCode};
use crate::provider::{count_words, enforce_ending, ProviderError, TextOption, TextProvider};
use crate::story::{assemble_story, Fragment, FragmentOrigin, SessionVersion};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("operation needs a {expected} session, this one is {actual}")]
    Version { expected: SessionVersion, actual: SessionVersion },
    #[error("session has ended")]
    Terminal,
    #[error("out of sequence: {0}")]
    Sequencing(String),
    #[error("steering is only accepted while the snake is moving")]
    NotMoving,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    Ended,
}

/// A non-game player decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "choice", content = "text", rename_all = "snake_case")]
pub enum Choice {
    Slot0,
    Slot1,
    SelfText(String),
    EndStory,
}

/// Inputs gathered for one game tick.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TickInput {
    /// Time spent since the previous tick; only counts down pauses.
    pub elapsed_ms: u64,
    pub steer: Option<Direction>,
    pub end_pause: bool,
    /// Commits text to the Yellow candy.
    pub self_text: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryResult {
    pub full_story: String,
    pub story_word_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snake_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candies_eaten: Option<BTreeMap<CandyKind, u32>>,
}

pub struct Session {
    id: Uuid,
    version: SessionVersion,
    config: GameConfig,
    fragments: Vec<Fragment>,
    game: Option<GameState>,
    decision_times: Vec<f64>,
    created_at: NaiveDateTime,
    status: SessionStatus,
    options: Option<(TextOption, TextOption)>,
    hold: Option<ProviderError>,
    shown_at: Option<NaiveDateTime>,
    ending: Option<String>,
    provider: Arc<TextProvider>,
    clock: Arc<dyn Clock>,
    log: LogWriter,
}

impl std::fmt::Debug for Session {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Session")
            .field("id", &self.id)
            .field("version", &self.version)
            .field("status", &self.status)
            .field("fragments", &self.fragments.len())
            .finish()
    }
}

impl Session {
    /// Opens a session and requests the first pair of options. A provider
    /// failure leaves the session waiting for [`Session::retry_generation`].
    pub fn start(
        version: SessionVersion,
        config: GameConfig,
        provider: Arc<TextProvider>,
        seed: u64,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, SessionError> {
        config.validate().map_err(EngineError::from)?;
        let game = match version {
            SessionVersion::Game => Some(GameState::new(config.clone(), seed)?),
            SessionVersion::NonGame => None,
        };
        let created_at = clock.now();
        let mut session = Self {
            id: Uuid::new_v4(),
            version,
            config,
            fragments: Vec::new(),
            game,
            decision_times: Vec::new(),
            created_at,
            status: SessionStatus::Active,
            options: None,
            hold: None,
            shown_at: None,
            ending: None,
            provider,
            clock,
            log: LogWriter::new(),
        };
        session.record(LogPayload::GameStart);
        session.request_options()?;
        Ok(session)
    }

    pub fn id(&self) -> Uuid {
        self.id
    }

    pub fn version(&self) -> SessionVersion {
        self.version
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn created_at(&self) -> NaiveDateTime {
        self.created_at
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn fragments(&self) -> &[Fragment] {
        &self.fragments
    }

    pub fn game(&self) -> Option<&GameState> {
        self.game.as_ref()
    }

    pub fn decision_times(&self) -> &[f64] {
        &self.decision_times
    }

    /// Options currently on offer (NonGame) or carried by the candies (Game).
    pub fn options(&self) -> Option<&(TextOption, TextOption)> {
        self.options.as_ref()
    }

    /// The provider failure the session is waiting out, if any.
    pub fn hold_error(&self) -> Option<&ProviderError> {
        self.hold.as_ref()
    }

    pub fn ending(&self) -> Option<&str> {
        self.ending.as_deref()
    }

    /// Story so far, ending included once written.
    pub fn story(&self) -> String {
        assemble_story(
            self.fragments
                .iter()
                .map(|f| f.text.as_str())
                .chain(self.ending.as_deref()),
        )
    }

    pub fn log_text(&self) -> &str {
        self.log.contents()
    }

    /// Current time at log resolution, so live and replayed timings agree.
    fn stamp(&self) -> NaiveDateTime {
        let now = self.clock.now();
        now.with_nanosecond(0).unwrap_or(now)
    }

    fn record(&mut self, payload: LogPayload) {
        let event = LogEvent::new(self.stamp(), payload);
        self.log.append(&event);
    }

    fn ensure_active(&self) -> Result<(), SessionError> {
        match self.status {
            SessionStatus::Active => Ok(()),
            SessionStatus::Ended => Err(SessionError::Terminal),
        }
    }

    fn ensure_version(&self, expected: SessionVersion) -> Result<(), SessionError> {
        if self.version == expected {
            Ok(())
        } else {
            Err(SessionError::Version { expected, actual: self.version })
        }
    }

    /// Asks again for options after a provider failure.
    pub fn retry_generation(&mut self) -> Result<(), SessionError> {
        self.ensure_active()?;
        if self.hold.is_none() {
            return Err(SessionError::Sequencing("no generation is pending".into()));
        }
        self.request_options()
    }

    fn request_options(&mut self) -> Result<(), SessionError> {
        let story = self.story();
        let (low, high) = match self.provider.generate_options(&story, &self.config) {
            Ok(pair) => pair,
            Err(e) => {
                self.hold = Some(e);
                return Ok(());
            }
        };
        self.hold = None;

        let codes = match self.game.as_mut() {
            None => [OptionCode::temperature(low.temperature), OptionCode::temperature(high.temperature)],
            Some(game) => {
                match game.spawn_turn_candies(&low, &high, None) {
                    Ok(()) => {}
                    Err(EngineError::Jammed { .. }) => {
                        game.abandon();
                        self.finish();
                        return Ok(());
                    }
                    Err(e) => return Err(e.into()),
                }
                let kind = |slot| game.candy_in_slot(slot).map(|c| c.kind).expect("candy spawned");
                [
                    OptionCode::candy(OptionSlot::PoolOne, kind(OptionSlot::PoolOne)),
                    OptionCode::candy(OptionSlot::PoolTwo, kind(OptionSlot::PoolTwo)),
                ]
            }
        };
        self.record(LogPayload::OptionShown { code: codes[0], text: low.text.clone() });
        self.record(LogPayload::OptionShown { code: codes[1], text: high.text.clone() });
        self.shown_at = Some(self.stamp());
        self.options = Some((low, high));
        Ok(())
    }

    fn push_fragment(&mut self, text: String, origin: FragmentOrigin) {
        let now = self.stamp();
        let shown = self.shown_at.take().unwrap_or(now);
        self.decision_times.push((now - shown).num_milliseconds() as f64 / 1000.0);
        self.fragments.push(Fragment { text, origin });
        self.options = None;
    }

    /// Applies a non-game decision.
    pub fn submit_choice(&mut self, choice: Choice) -> Result<(), SessionError> {
        self.ensure_version(SessionVersion::NonGame)?;
        self.ensure_active()?;
        if choice == Choice::EndStory {
            self.finish();
            return Ok(());
        }
        let Some((low, high)) = self.options.clone() else {
            return Err(SessionError::Sequencing("no options are on offer".into()));
        };
        match choice {
            Choice::Slot0 | Choice::Slot1 => {
                let (option, origin) = if choice == Choice::Slot0 {
                    (low, FragmentOrigin::Slot0)
                } else {
                    (high, FragmentOrigin::Slot1)
                };
                self.record(LogPayload::Chose { code: OptionCode::temperature(option.temperature) });
                self.push_fragment(option.text, origin);
            }
            Choice::SelfText(text) => {
                let text = text.trim_end().to_string();
                if text.trim().is_empty() {
                    return Err(SessionError::Invalid("self-written text is empty".into()));
                }
                self.record(LogPayload::AddOwnText { text: text.clone() });
                self.push_fragment(text, FragmentOrigin::SelfText);
            }
            Choice::EndStory => unreachable!("handled above"),
        }
        self.request_options()
    }

    /// Feeds one tick of input to the game.
    ///
    /// While paused, `elapsed_ms` counts the pause down and `end_pause` cuts it
    /// short; while moving, the snake takes exactly one step.
    pub fn advance_game(&mut self, input: TickInput) -> Result<Vec<TurnEvent>, SessionError> {
        self.ensure_version(SessionVersion::Game)?;
        self.ensure_active()?;
        let game = self.game.as_mut().expect("game sessions hold a game state");
        let phase = game.phase;

        if let Some(text) = &input.self_text {
            match phase {
                Phase::Paused { self_write_enabled: true, .. } => {
                    let text = text.trim_end().to_string();
                    game.set_self_text(&text)?;
                    self.record(LogPayload::OptionShown {
                        code: OptionCode::candy(OptionSlot::SelfWritten, CandyKind::Yellow),
                        text,
                    });
                }
                _ => return Err(SessionError::Sequencing("self-writing is not open".into())),
            }
        }

        let game = self.game.as_mut().expect("game sessions hold a game state");
        match phase {
            Phase::AwaitingTexts => {
                Err(SessionError::Sequencing("waiting for the next pair of texts".into()))
            }
            Phase::Ended => Err(SessionError::Terminal),
            Phase::Paused { .. } => {
                if input.steer.is_some() {
                    return Err(SessionError::NotMoving);
                }
                if input.end_pause {
                    game.end_pause()?;
                } else {
                    game.advance_pause(input.elapsed_ms)?;
                }
                Ok(Vec::new())
            }
            Phase::Moving => {
                let events = game.step(input.steer)?;
                self.absorb(&events)?;
                Ok(events)
            }
        }
    }

    fn absorb(&mut self, events: &[TurnEvent]) -> Result<(), SessionError> {
        let mut eaten = None;
        for event in events {
            match event {
                TurnEvent::CandyEaten { kind, slot } => eaten = Some((*kind, *slot)),
                TurnEvent::TextAppended { text } => {
                    let (kind, slot) = eaten.expect("text follows the candy that carried it");
                    self.record(LogPayload::Chose { code: OptionCode::candy(slot, kind) });
                    let origin = match slot {
                        OptionSlot::PoolOne => FragmentOrigin::Slot0,
                        OptionSlot::PoolTwo => FragmentOrigin::Slot1,
                        OptionSlot::SelfWritten => FragmentOrigin::SelfText,
                    };
                    self.push_fragment(text.clone(), origin);
                }
                _ => {}
            }
        }
        match self.game.as_ref().map(|g| g.phase) {
            Some(Phase::Ended) => self.finish(),
            Some(Phase::AwaitingTexts) => self.request_options()?,
            _ => {}
        }
        Ok(())
    }

    /// Ends a game session on the player's behalf, e.g. after a disconnect.
    pub fn abandon(&mut self) -> Result<(), SessionError> {
        self.ensure_active()?;
        if let Some(game) = self.game.as_mut() {
            game.abandon();
        }
        self.finish();
        Ok(())
    }

    fn finish(&mut self) {
        let story = self.story();
        let limit = self.config.ending_word_limit;
        let ending = self
            .provider
            .generate_ending(&story, &self.config)
            .unwrap_or_else(|_| enforce_ending("", limit));
        self.record(LogPayload::Ending { text: ending.clone() });
        self.ending = Some(ending);
        self.record(LogPayload::GameEnd);
        if let Some(game) = &self.game {
            let count = game.total_eaten();
            self.record(LogPayload::Ate { count });
        }
        self.options = None;
        self.hold = None;
        self.shown_at = None;
        self.status = SessionStatus::Ended;
    }

    /// Result-page data. Repeated calls return the same value.
    pub fn finalize(&self) -> Result<StoryResult, SessionError> {
        if self.status != SessionStatus::Ended {
            return Err(SessionError::Sequencing("session is still active".into()));
        }
        let full_story = self.story();
        Ok(StoryResult {
            story_word_count: count_words(&full_story),
            full_story,
            snake_length: self.game.as_ref().map(|g| g.snake.len()),
            candies_eaten: self.game.as_ref().map(|g| g.eaten_counts.clone()),
        })
    }
}
