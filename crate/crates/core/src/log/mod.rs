//! Line-oriented session log.
//!
//! Every event starts with a `[M/D/YYYY h:mm:ss AM]` header followed directly by
//! its payload. Option texts may span lines and run until the next header.
//! Parsing keeps the blank-line layout so that writing a parsed trace back
//! reproduces the original bytes.

mod parse;
mod replay;
mod timestamp;
mod write;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{CandyKind, OptionSlot};
use crate::story::SessionVersion;

pub use parse::parse_log;
pub use replay::{replay, ReplayError, ReplayedSession};
pub use timestamp::{format_timestamp, parse_timestamp};
pub use write::{write_event, write_trace, LogWriter};

/// Identifies an option inside a turn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "style", rename_all = "snake_case")]
pub enum OptionCode {
    /// Game logs: option slot and candy kind id.
    Candy { slot: u8, kind: u8 },
    /// Non-game logs: the sampling temperature.
    Temperature { value: f64 },
}

impl OptionCode {
    pub fn candy(slot: OptionSlot, kind: CandyKind) -> Self {
        OptionCode::Candy { slot: slot.index(), kind: kind.id() }
    }

    pub fn temperature(value: f64) -> Self {
        OptionCode::Temperature { value }
    }

    pub fn version(&self) -> SessionVersion {
        match self {
            OptionCode::Candy { .. } => SessionVersion::Game,
            OptionCode::Temperature { .. } => SessionVersion::NonGame,
        }
    }
}

impl std::fmt::Display for OptionCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OptionCode::Candy { slot, kind } => write!(f, "[{slot}][{kind}]"),
            OptionCode::Temperature { value } => write!(f, "[{value}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogPayload {
    GameStart,
    GameEnd,
    OptionShown { code: OptionCode, text: String },
    Chose { code: OptionCode },
    AddOwnText { text: String },
    /// Closing passage, written just before `Game End`.
    Ending { text: String },
    Ate { count: u32 },
}

impl LogPayload {
    pub fn text(&self) -> Option<&str> {
        match self {
            LogPayload::OptionShown { text, .. }
            | LogPayload::AddOwnText { text }
            | LogPayload::Ending { text } => Some(text),
            _ => None,
        }
    }

    /// The version this payload pins a log to, if any.
    pub fn version_hint(&self) -> Option<SessionVersion> {
        match self {
            LogPayload::OptionShown { code, .. } | LogPayload::Chose { code } => Some(code.version()),
            LogPayload::AddOwnText { .. } => Some(SessionVersion::NonGame),
            LogPayload::Ate { .. } => Some(SessionVersion::Game),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEvent {
    pub timestamp: NaiveDateTime,
    pub payload: LogPayload,
}

impl LogEvent {
    pub fn new(timestamp: NaiveDateTime, payload: LogPayload) -> Self {
        Self { timestamp, payload }
    }
}

/// Blank-line layout of a log file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceLayout {
    pub leading_blank_lines: usize,
    /// Blank lines after each event, parallel to the event list.
    pub gaps: Vec<usize>,
    pub final_newline: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogWarning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTrace {
    pub version: SessionVersion,
    pub events: Vec<LogEvent>,
    pub layout: TraceLayout,
    pub warnings: Vec<LogWarning>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl SessionTrace {
    pub fn chose_count(&self) -> usize {
        self.events.iter().filter(|e| matches!(e.payload, LogPayload::Chose { .. })).count()
    }

    pub fn ate(&self) -> Option<u32> {
        self.events.iter().rev().find_map(|e| match e.payload {
            LogPayload::Ate { count } => Some(count),
            _ => None,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.events.iter().any(|e| e.payload == LogPayload::GameEnd)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("log contains no events")]
    Empty,
    #[error("line {line}: {found} payload in a {expected} log")]
    MixedVersion { line: usize, expected: SessionVersion, found: SessionVersion },
    #[error("line {line}: expected {expected} log, found {found} payload")]
    VersionMismatch { line: usize, expected: SessionVersion, found: SessionVersion },
}

impl LogError {
    pub fn line(&self) -> Option<usize> {
        match self {
            LogError::Parse { line, .. }
            | LogError::MixedVersion { line, .. }
            | LogError::VersionMismatch { line, .. } => Some(*line),
            LogError::Empty => None,
        }
    }
}
