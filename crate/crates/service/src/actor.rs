//! One thread per session. The thread owns the [`Session`], so every command
//! is applied in arrival order and slow text generation only stalls its own
//! session.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::PathBuf;
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Value};
use snake_story::engine::{Direction, Phase};
use snake_story::{Choice, Session, SessionStatus, SessionVersion, StoryResult, TickInput};
use tokio::sync::mpsc::error::TrySendError;
use tokio::sync::mpsc::Sender;
use uuid::Uuid;

use crate::wire::{ErrorPayload, InputAction, OptionsView, PauseView, StateView, WireKind, WireMessage};

const RETRY_INTERVAL: Duration = Duration::from_secs(2);
const PAUSE_PUSH_INTERVAL: Duration = Duration::from_secs(1);
const IDLE_WAKE: Duration = Duration::from_millis(250);

/// What the socket task should do next.
#[derive(Debug, Clone)]
pub enum Outbound {
    Message(WireMessage),
    Close(String),
}

pub enum Command {
    Attach { conn: Uuid, sink: Sender<Outbound> },
    Detach { conn: Uuid },
    Input { conn: Uuid, action: InputAction },
    /// Sends an error to one connection without touching the session.
    Reject { conn: Uuid, error: ErrorPayload },
}

/// Shared view of a session for the HTTP index.
#[derive(Debug, Clone, Serialize)]
pub struct SessionInfo {
    pub status: SessionStatus,
    pub turns: usize,
    pub connected: bool,
    pub result: Option<StoryResult>,
    pub last_seq: u64,
}

impl Default for SessionInfo {
    fn default() -> Self {
        Self { status: SessionStatus::Active, turns: 0, connected: false, result: None, last_seq: 0 }
    }
}

pub struct Actor {
    session: Session,
    sink: Option<(Uuid, Sender<Outbound>)>,
    seq: u64,
    info: Arc<Mutex<SessionInfo>>,
    log: Option<File>,
    log_path: PathBuf,
    persisted: usize,
    grace: Duration,
    disconnected_since: Option<Instant>,
    pending_steer: Option<Direction>,
    last_tick: Instant,
    options_sent_for: Option<usize>,
    hold_reported: bool,
    last_retry: Instant,
    last_pause_push: Option<Instant>,
}

impl Actor {
    pub fn new(session: Session, info: Arc<Mutex<SessionInfo>>, log_path: PathBuf, grace: Duration) -> Self {
        let now = Instant::now();
        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(|e| tracing::error!(path = %log_path.display(), "cannot open log: {e}"))
            .ok();
        let mut actor = Self {
            session,
            sink: None,
            seq: 0,
            info,
            log,
            log_path,
            persisted: 0,
            grace,
            disconnected_since: Some(now),
            pending_steer: None,
            last_tick: now,
            options_sent_for: None,
            hold_reported: false,
            last_retry: now,
            last_pause_push: None,
        };
        actor.flush_log();
        actor
    }

    pub fn run(mut self, commands: Receiver<Command>) {
        loop {
            match commands.recv_timeout(self.next_wake()) {
                Ok(cmd) => self.handle(cmd),
                Err(RecvTimeoutError::Timeout) => {}
                Err(RecvTimeoutError::Disconnected) => {
                    if self.session.status() == SessionStatus::Active {
                        let _ = self.session.abandon();
                    }
                }
            }
            self.tick();
            self.sync();
            if self.session.status() == SessionStatus::Ended {
                self.conclude();
                return;
            }
        }
    }

    fn next_wake(&self) -> Duration {
        let tick = Duration::from_millis(self.session.config().tick_interval_ms);
        match (&self.sink, self.session.game().map(|g| g.phase)) {
            (Some(_), Some(Phase::Moving | Phase::Paused { .. })) => {
                tick.saturating_sub(self.last_tick.elapsed()).max(Duration::from_millis(1))
            }
            (None, _) => {
                let left = self.disconnected_since.map_or(self.grace, |t| self.grace.saturating_sub(t.elapsed()));
                left.clamp(Duration::from_millis(1), IDLE_WAKE)
            }
            _ => IDLE_WAKE,
        }
    }

    fn handle(&mut self, cmd: Command) {
        match cmd {
            Command::Attach { conn, sink } => {
                if let Some((_, old)) = self.sink.take() {
                    let _ = old.try_send(Outbound::Message(self.message(
                        WireKind::Event,
                        json!({ "type": "takeover", "message": "another connection took over this session" }),
                    )));
                    let _ = old.try_send(Outbound::Close("taken over by another connection".into()));
                }
                self.sink = Some((conn, sink));
                self.disconnected_since = None;
                self.last_tick = Instant::now();
                self.send_state();
                if let Some(options) = self.session.options() {
                    let view = OptionsView::of(&self.session, options);
                    self.send(WireKind::Options, &view);
                    self.options_sent_for = Some(self.session.fragments().len());
                }
                self.send_pause(true);
            }
            Command::Detach { conn } => {
                if self.sink.as_ref().is_some_and(|(c, _)| *c == conn) {
                    self.sink = None;
                    self.disconnected_since = Some(Instant::now());
                }
            }
            Command::Reject { conn, error } => {
                if self.is_current(conn) {
                    self.send(WireKind::Error, &error);
                }
            }
            Command::Input { conn, action } => {
                if !self.is_current(conn) {
                    return;
                }
                if let Err(e) = self.apply(action) {
                    self.send(WireKind::Error, &ErrorPayload::from(&e));
                }
            }
        }
    }

    fn is_current(&self, conn: Uuid) -> bool {
        self.sink.as_ref().is_some_and(|(c, _)| *c == conn)
    }

    fn apply(&mut self, action: InputAction) -> Result<(), snake_story::SessionError> {
        use snake_story::SessionError;
        let version = self.session.version();
        let wrong = |expected| SessionError::Version { expected, actual: version };
        match action {
            InputAction::Steer(d) => {
                if version != SessionVersion::Game {
                    return Err(wrong(SessionVersion::Game));
                }
                if self.session.status() == SessionStatus::Ended {
                    return Err(SessionError::Terminal);
                }
                match self.session.game().map(|g| g.phase) {
                    Some(Phase::Moving) => {
                        self.pending_steer = Some(d);
                        Ok(())
                    }
                    _ => Err(SessionError::NotMoving),
                }
            }
            InputAction::ChooseSlot(slot) => {
                if version != SessionVersion::NonGame {
                    return Err(wrong(SessionVersion::NonGame));
                }
                let choice = match slot {
                    0 => Choice::Slot0,
                    1 => Choice::Slot1,
                    other => return Err(SessionError::Invalid(format!("no option slot {other}"))),
                };
                self.session.submit_choice(choice)
            }
            InputAction::SelfText(text) => match version {
                SessionVersion::NonGame => self.session.submit_choice(Choice::SelfText(text)),
                SessionVersion::Game => {
                    self.session.advance_game(TickInput { self_text: Some(text), ..TickInput::default() })?;
                    self.send_state();
                    Ok(())
                }
            },
            InputAction::EndPause => {
                self.session.advance_game(TickInput { end_pause: true, ..TickInput::default() })?;
                self.last_tick = Instant::now();
                self.send_state();
                Ok(())
            }
            InputAction::EndStory => {
                if version != SessionVersion::NonGame {
                    return Err(wrong(SessionVersion::NonGame));
                }
                self.session.submit_choice(Choice::EndStory)
            }
        }
    }

    /// Drives the clock-based parts: game ticks, pause countdown, generation
    /// retries and the reconnect deadline.
    fn tick(&mut self) {
        if self.session.status() == SessionStatus::Ended {
            return;
        }
        if self.sink.is_none() {
            if self.disconnected_since.is_some_and(|t| t.elapsed() >= self.grace) {
                tracing::info!(session = %self.session.id(), "no reconnect within grace period, ending");
                let _ = self.session.abandon();
            }
            return;
        }
        if self.session.hold_error().is_some() {
            if self.last_retry.elapsed() >= RETRY_INTERVAL {
                self.last_retry = Instant::now();
                let _ = self.session.retry_generation();
            }
            return;
        }
        let Some(phase) = self.session.game().map(|g| g.phase) else { return };
        let interval = Duration::from_millis(self.session.config().tick_interval_ms);
        let elapsed = self.last_tick.elapsed();
        if elapsed < interval {
            return;
        }
        self.last_tick = Instant::now();
        match phase {
            Phase::Moving => {
                let steer = self.pending_steer.take();
                match self.session.advance_game(TickInput { steer, ..TickInput::default() }) {
                    Ok(events) => {
                        for event in &events {
                            self.send(WireKind::Event, event);
                        }
                    }
                    Err(e) => self.send(WireKind::Error, &ErrorPayload::from(&e)),
                }
                self.send_state();
            }
            Phase::Paused { .. } => {
                let ms = elapsed.as_millis() as u64;
                if let Err(e) = self.session.advance_game(TickInput { elapsed_ms: ms, ..TickInput::default() }) {
                    self.send(WireKind::Error, &ErrorPayload::from(&e));
                }
                self.send_pause(false);
                self.send_state();
            }
            Phase::AwaitingTexts | Phase::Ended => {}
        }
    }

    /// Pushes turn-boundary messages and mirrors progress into the index.
    fn sync(&mut self) {
        let turn = self.session.fragments().len();
        if let Some(options) = self.session.options() {
            if self.options_sent_for != Some(turn) {
                let view = OptionsView::of(&self.session, options);
                self.send(WireKind::Options, &view);
                self.options_sent_for = Some(turn);
                self.last_pause_push = None;
                self.send_pause(true);
                if self.session.version() == SessionVersion::NonGame {
                    self.send_state();
                }
            }
        }
        match self.session.hold_error() {
            Some(e) if !self.hold_reported => {
                let error = ErrorPayload::new("generation_failed", format!("{e}; retrying"));
                self.send(WireKind::Error, &error);
                self.hold_reported = true;
            }
            None => self.hold_reported = false,
            _ => {}
        }
        self.flush_log();
        let mut info = self.info.lock().unwrap_or_else(|p| p.into_inner());
        info.status = self.session.status();
        info.turns = turn;
        info.connected = self.sink.is_some();
        info.last_seq = self.seq;
    }

    fn conclude(&mut self) {
        self.flush_log();
        let result = self.session.finalize().ok();
        self.send_state();
        if let Some(result) = &result {
            let mut payload = serde_json::to_value(result).unwrap_or(Value::Null);
            payload["log_url"] = json!(format!("/sessions/{}/log", self.session.id()));
            let msg = self.message(WireKind::Result, payload);
            self.push(Outbound::Message(msg));
        }
        self.push(Outbound::Close("session ended".into()));
        let mut info = self.info.lock().unwrap_or_else(|p| p.into_inner());
        info.status = SessionStatus::Ended;
        info.turns = self.session.fragments().len();
        info.connected = false;
        info.result = result;
        info.last_seq = self.seq;
    }

    fn send_pause(&mut self, force: bool) {
        let Some(Phase::Paused { remaining_ms, self_write_enabled }) = self.session.game().map(|g| g.phase) else {
            return;
        };
        if !force && self.last_pause_push.is_some_and(|t| t.elapsed() < PAUSE_PUSH_INTERVAL) {
            return;
        }
        self.last_pause_push = Some(Instant::now());
        let view = PauseView {
            remaining_ms,
            total_ms: self.session.config().pause_ms(self_write_enabled),
            self_write_enabled,
        };
        self.send(WireKind::Pause, &view);
    }

    fn send_state(&mut self) {
        let view = StateView::of(&self.session);
        self.send(WireKind::State, &view);
    }

    fn message(&mut self, kind: WireKind, payload: Value) -> WireMessage {
        self.seq += 1;
        WireMessage { kind, seq: self.seq, payload }
    }

    fn send<T: Serialize>(&mut self, kind: WireKind, payload: &T) {
        if self.sink.is_none() {
            return;
        }
        let payload = serde_json::to_value(payload).unwrap_or(Value::Null);
        let msg = self.message(kind, payload);
        self.push(Outbound::Message(msg));
    }

    /// State snapshots are dropped when the socket lags; the next one
    /// supersedes them. Losing anything else drops the connection.
    fn push(&mut self, out: Outbound) {
        let Some((_, sink)) = &self.sink else { return };
        let droppable = matches!(&out, Outbound::Message(m) if m.kind == WireKind::State);
        match sink.try_send(out) {
            Ok(()) => {}
            Err(TrySendError::Full(_)) if droppable => {}
            Err(_) => {
                self.sink = None;
                self.disconnected_since = Some(Instant::now());
            }
        }
    }

    fn flush_log(&mut self) {
        let text = self.session.log_text();
        if text.len() == self.persisted {
            return;
        }
        let Some(file) = self.log.as_mut() else { return };
        let delta = &text.as_bytes()[self.persisted..];
        match file.write_all(delta).and_then(|_| file.flush()) {
            Ok(()) => self.persisted = text.len(),
            Err(e) => tracing::error!(path = %self.log_path.display(), "log write failed: {e}"),
        }
    }
}
