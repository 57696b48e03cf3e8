//! The `wire_v1` JSON protocol spoken over the session socket.
//!
//! Every server message is a [`WireMessage`] envelope. Clients send a
//! [`ClientInput`], either bare or wrapped in an envelope of kind `input`.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use snake_story::engine::{CandyKind, Direction, GameState, GridPosition, OptionSlot, Phase};
use snake_story::{Session, SessionError, SessionStatus, SessionVersion, TextOption};

pub const WIRE_SCHEMA: &str = "wire_v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WireKind {
    State,
    Options,
    Pause,
    Event,
    Result,
    Error,
    Input,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireMessage {
    pub kind: WireKind,
    /// Strictly increasing within a session, across reconnects.
    pub seq: u64,
    pub payload: Value,
}

/// One player action. Exactly one field must be set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClientInput {
    pub steer: Option<Direction>,
    pub choose_slot: Option<u8>,
    pub self_text: Option<String>,
    pub end_pause: Option<bool>,
    pub end_story: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputAction {
    Steer(Direction),
    ChooseSlot(u8),
    SelfText(String),
    EndPause,
    EndStory,
}

impl ClientInput {
    pub fn steer(d: Direction) -> Self {
        Self { steer: Some(d), ..Self::default() }
    }

    pub fn choose_slot(slot: u8) -> Self {
        Self { choose_slot: Some(slot), ..Self::default() }
    }

    pub fn self_text(text: impl Into<String>) -> Self {
        Self { self_text: Some(text.into()), ..Self::default() }
    }

    pub fn end_pause() -> Self {
        Self { end_pause: Some(true), ..Self::default() }
    }

    pub fn end_story() -> Self {
        Self { end_story: Some(true), ..Self::default() }
    }

    pub fn action(self) -> Result<InputAction, String> {
        let mut actions = Vec::new();
        if let Some(d) = self.steer {
            actions.push(InputAction::Steer(d));
        }
        if let Some(slot) = self.choose_slot {
            actions.push(InputAction::ChooseSlot(slot));
        }
        if let Some(text) = self.self_text {
            actions.push(InputAction::SelfText(text));
        }
        if self.end_pause == Some(true) {
            actions.push(InputAction::EndPause);
        }
        if self.end_story == Some(true) {
            actions.push(InputAction::EndStory);
        }
        match actions.len() {
            1 => Ok(actions.remove(0)),
            0 => Err("input sets no action".into()),
            _ => Err("input must set exactly one action".into()),
        }
    }
}

/// Accepts a bare input object or an `input` envelope.
pub fn parse_client_message(text: &str) -> Result<ClientInput, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| format!("malformed JSON: {e}"))?;
    let body = match value.get("kind") {
        Some(kind) if kind == "input" => value.get("payload").cloned().unwrap_or(Value::Null),
        Some(other) => return Err(format!("clients may only send input messages, got {other}")),
        None => value,
    };
    serde_json::from_value(body).map_err(|e| format!("bad input: {e}"))
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorPayload {
    pub code: &'static str,
    pub message: String,
}

impl ErrorPayload {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<&SessionError> for ErrorPayload {
    fn from(e: &SessionError) -> Self {
        let code = match e {
            SessionError::Version { .. } => "wrong_version",
            SessionError::Terminal => "terminal",
            SessionError::Sequencing(_) => "sequencing",
            SessionError::NotMoving => "not_moving",
            SessionError::Invalid(_) => "invalid_input",
            SessionError::Engine(_) => "engine",
            SessionError::Provider(_) => "provider",
        };
        let message = match e {
            SessionError::NotMoving => format!("not moving: {e}"),
            _ => e.to_string(),
        };
        Self { code, message }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CandyView {
    pub kind: CandyKind,
    pub kind_id: u8,
    pub slot: OptionSlot,
    pub position: GridPosition,
    pub text: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct GameView {
    pub map_size: u32,
    pub lives: u32,
    pub phase: Phase,
    pub snake: Vec<GridPosition>,
    pub heading: Direction,
    pub candies: Vec<CandyView>,
    pub obstacles: Vec<GridPosition>,
    pub eaten: Vec<(CandyKind, u32)>,
    pub self_write_unlocked: bool,
    pub ticks: u64,
}

impl From<&GameState> for GameView {
    fn from(g: &GameState) -> Self {
        Self {
            map_size: g.config.map_size,
            lives: g.lives,
            phase: g.phase,
            snake: g.snake.body.clone(),
            heading: g.snake.heading,
            candies: g
                .candies
                .iter()
                .map(|c| CandyView {
                    kind: c.kind,
                    kind_id: c.kind.id(),
                    slot: c.slot,
                    position: c.position,
                    text: c.text.clone(),
                })
                .collect(),
            obstacles: g.obstacles.iter().copied().collect(),
            eaten: g.eaten_counts.iter().map(|(k, v)| (*k, *v)).collect(),
            self_write_unlocked: g.self_write_unlocked,
            ticks: g.ticks,
        }
    }
}

/// Full snapshot; the client never patches state.
#[derive(Debug, Clone, Serialize)]
pub struct StateView {
    pub session_id: String,
    pub version: SessionVersion,
    pub status: SessionStatus,
    pub turn: usize,
    pub story: String,
    pub generation_pending: bool,
    pub game: Option<GameView>,
}

impl StateView {
    pub fn of(session: &Session) -> Self {
        Self {
            session_id: session.id().to_string(),
            version: session.version(),
            status: session.status(),
            turn: session.fragments().len(),
            story: session.story(),
            generation_pending: session.status() == SessionStatus::Active && session.options().is_none(),
            game: session.game().map(GameView::from),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptionView {
    pub text: String,
    pub temperature: f64,
    /// Candy carrying this text, game version only.
    pub candy: Option<CandyKind>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptionsView {
    pub turn: usize,
    pub options: [OptionView; 2],
}

impl OptionsView {
    pub fn of(session: &Session, (low, high): &(TextOption, TextOption)) -> Self {
        let candy = |slot| session.game().and_then(|g| g.candy_in_slot(slot)).map(|c| c.kind);
        let view = |o: &TextOption, slot| OptionView { text: o.text.clone(), temperature: o.temperature, candy: candy(slot) };
        Self {
            turn: session.fragments().len(),
            options: [view(low, OptionSlot::PoolOne), view(high, OptionSlot::PoolTwo)],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PauseView {
    pub remaining_ms: u64,
    pub total_ms: u64,
    pub self_write_enabled: bool,
}
