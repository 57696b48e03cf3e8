//! Local server for Snake Story sessions.
//!
//! - `POST /sessions` creates a session and returns its socket URL
//! - `GET /sessions` lists sessions with version and status
//! - `GET /sessions/{id}/log` returns the session log exactly as persisted
//! - `GET /sessions/{id}/ws` upgrades to the `wire_v1` socket
//! - `/` serves the bundled browser client

mod actor;
pub mod wire;

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::mpsc as std_mpsc;
use std::sync::{Arc, Mutex, RwLock};
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::ws::{CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use snake_story::{GameConfig, ProviderConfig, Session, SessionStatus, SessionVersion, SystemClock, TextProvider};
use thiserror::Error;
use tokio::sync::{mpsc, oneshot};
use uuid::Uuid;

use crate::actor::{Actor, Command, Outbound, SessionInfo};
use crate::wire::{parse_client_message, ErrorPayload, WireKind, WireMessage, WIRE_SCHEMA};

pub use crate::actor::SessionInfo as SessionProgress;

pub const DEFAULT_PORT: u16 = 8473;
pub const DEFAULT_RECONNECT_GRACE: Duration = Duration::from_secs(120);
const OUTBOUND_BUFFER: usize = 256;

const INDEX_HTML: &str = include_str!("../static/index.html");
const APP_JS: &str = include_str!("../static/app.js");
const STYLE_CSS: &str = include_str!("../static/style.css");

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub logs_dir: PathBuf,
    /// Sessions that do not say otherwise use the offline generator.
    pub offline_by_default: bool,
    /// Backend for online sessions.
    pub provider: ProviderConfig,
    /// How long a game waits for its player to reconnect before ending.
    pub reconnect_grace: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            logs_dir: PathBuf::from("logs"),
            offline_by_default: false,
            provider: ProviderConfig::default().with_env_overrides(),
            reconnect_grace: DEFAULT_RECONNECT_GRACE,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("cannot create log directory {path}: {source}")]
    LogDir { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct SessionEntry {
    version: SessionVersion,
    seed: u64,
    offline: bool,
    created_at: String,
    log_path: PathBuf,
    commands: std_mpsc::Sender<Command>,
    info: Arc<Mutex<SessionInfo>>,
}

#[derive(Clone)]
pub struct AppState {
    config: Arc<ServiceConfig>,
    sessions: Arc<RwLock<HashMap<Uuid, Arc<SessionEntry>>>>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<Self, ServiceError> {
        std::fs::create_dir_all(&config.logs_dir)
            .map_err(|source| ServiceError::LogDir { path: config.logs_dir.clone(), source })?;
        Ok(Self { config: Arc::new(config), sessions: Arc::default() })
    }

    fn entry(&self, id: &str) -> Option<(Uuid, Arc<SessionEntry>)> {
        let id = Uuid::parse_str(id).ok()?;
        let sessions = self.sessions.read().unwrap_or_else(|p| p.into_inner());
        sessions.get(&id).map(|e| (id, e.clone()))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/", get(|| async { Html(INDEX_HTML) }))
        .route("/app.js", get(|| async { ([(header::CONTENT_TYPE, "text/javascript")], APP_JS) }))
        .route("/style.css", get(|| async { ([(header::CONTENT_TYPE, "text/css")], STYLE_CSS) }))
        .route("/sessions", get(list_sessions).post(create_session))
        .route("/sessions/{id}/log", get(get_log))
        .route("/sessions/{id}/ws", get(session_socket))
        .with_state(state)
}

/// Binds and serves until the process is stopped.
pub async fn serve(config: ServiceConfig, addr: SocketAddr) -> Result<(), ServiceError> {
    let state = AppState::new(config)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateRequest {
    version: SessionVersion,
    seed: Option<u64>,
    config: Option<GameConfig>,
    offline: Option<bool>,
}

#[derive(Debug, Serialize)]
struct CreateResponse {
    session_id: Uuid,
    ws_url: String,
    log_url: String,
    version: SessionVersion,
    seed: u64,
    offline: bool,
    wire: &'static str,
}

fn error_response(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Response {
    let request: CreateRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, format!("invalid request: {e}")),
    };
    let config = request.config.unwrap_or_default();
    if let Err(e) = config.validate() {
        return error_response(StatusCode::BAD_REQUEST, e.to_string());
    }
    let seed = request.seed.unwrap_or_else(|| Uuid::new_v4().as_u64_pair().0);
    let offline = request.offline.unwrap_or(state.config.offline_by_default);
    let provider = if offline {
        TextProvider::offline(seed)
    } else {
        let provider = match TextProvider::new(state.config.provider.clone()) {
            Ok(p) => p,
            Err(e) => return error_response(StatusCode::SERVICE_UNAVAILABLE, e.to_string()),
        };
        if let Err(e) = provider.check_ready() {
            return error_response(StatusCode::SERVICE_UNAVAILABLE, e.to_string());
        }
        provider
    };

    let (cmd_tx, cmd_rx) = std_mpsc::channel();
    let (ready_tx, ready_rx) = oneshot::channel();
    let info = Arc::new(Mutex::new(SessionInfo::default()));
    let actor_info = info.clone();
    let logs_dir = state.config.logs_dir.clone();
    let grace = state.config.reconnect_grace;
    let version = request.version;
    let spawned = std::thread::Builder::new().name("session".into()).spawn(move || {
        let session = match Session::start(version, config, Arc::new(provider), seed, Arc::new(SystemClock)) {
            Ok(s) => s,
            Err(e) => {
                let _ = ready_tx.send(Err(e.to_string()));
                return;
            }
        };
        let id = session.id();
        let created = session.created_at().format("%Y-%m-%dT%H:%M:%S").to_string();
        let log_path = logs_dir.join(format!("{id}.{version}.log"));
        let actor = Actor::new(session, actor_info, log_path.clone(), grace);
        if ready_tx.send(Ok((id, created, log_path))).is_ok() {
            actor.run(cmd_rx);
        }
    });
    if let Err(e) = spawned {
        return error_response(StatusCode::INTERNAL_SERVER_ERROR, e.to_string());
    }
    let (id, created_at, log_path) = match ready_rx.await {
        Ok(Ok(started)) => started,
        Ok(Err(e)) => return error_response(StatusCode::BAD_REQUEST, e),
        Err(_) => return error_response(StatusCode::INTERNAL_SERVER_ERROR, "session thread exited"),
    };
    let entry = SessionEntry { version, seed, offline, created_at, log_path, commands: cmd_tx, info };
    state.sessions.write().unwrap_or_else(|p| p.into_inner()).insert(id, Arc::new(entry));
    tracing::info!(session = %id, %version, offline, "session created");
    let response = CreateResponse {
        session_id: id,
        ws_url: format!("/sessions/{id}/ws"),
        log_url: format!("/sessions/{id}/log"),
        version,
        seed,
        offline,
        wire: WIRE_SCHEMA,
    };
    (StatusCode::CREATED, Json(response)).into_response()
}

#[derive(Debug, Serialize)]
struct IndexEntry {
    session_id: Uuid,
    version: SessionVersion,
    status: SessionStatus,
    created_at: String,
    seed: u64,
    offline: bool,
    turns: usize,
    connected: bool,
    log_url: String,
}

async fn list_sessions(State(state): State<AppState>) -> Json<Vec<IndexEntry>> {
    let sessions = state.sessions.read().unwrap_or_else(|p| p.into_inner());
    let mut index: Vec<IndexEntry> = sessions
        .iter()
        .map(|(id, e)| {
            let info = e.info.lock().unwrap_or_else(|p| p.into_inner());
            IndexEntry {
                session_id: *id,
                version: e.version,
                status: info.status,
                created_at: e.created_at.clone(),
                seed: e.seed,
                offline: e.offline,
                turns: info.turns,
                connected: info.connected,
                log_url: format!("/sessions/{id}/log"),
            }
        })
        .collect();
    index.sort_by(|a, b| a.created_at.cmp(&b.created_at).then(a.session_id.cmp(&b.session_id)));
    Json(index)
}

async fn get_log(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    let Some((_, entry)) = state.entry(&id) else {
        return error_response(StatusCode::NOT_FOUND, "unknown session");
    };
    match tokio::fs::read(&entry.log_path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], bytes).into_response(),
        Err(e) => error_response(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn session_socket(State(state): State<AppState>, Path(id): Path<String>, ws: WebSocketUpgrade) -> Response {
    let Some((_, entry)) = state.entry(&id) else {
        return error_response(StatusCode::NOT_FOUND, "unknown session");
    };
    ws.on_upgrade(move |socket| drive_socket(socket, entry))
}

fn encode(msg: &WireMessage) -> Message {
    Message::Text(serde_json::to_string(msg).unwrap_or_default().into())
}

async fn close(socket: &mut WebSocket, reason: String) {
    let frame = CloseFrame { code: axum::extract::ws::close_code::NORMAL, reason: reason.into() };
    let _ = socket.send(Message::Close(Some(frame))).await;
}

async fn drive_socket(mut socket: WebSocket, entry: Arc<SessionEntry>) {
    let conn = Uuid::new_v4();
    let (tx, mut rx) = mpsc::channel(OUTBOUND_BUFFER);
    if entry.commands.send(Command::Attach { conn, sink: tx }).is_err() {
        // The session has already finished: hand over its result and close.
        let (result, seq) = {
            let info = entry.info.lock().unwrap_or_else(|p| p.into_inner());
            (info.result.clone(), info.last_seq)
        };
        if let Some(result) = result {
            let msg = WireMessage { kind: WireKind::Result, seq: seq + 1, payload: json!(result) };
            let _ = socket.send(encode(&msg)).await;
        }
        close(&mut socket, "session ended".into()).await;
        return;
    }
    loop {
        tokio::select! {
            out = rx.recv() => match out {
                Some(Outbound::Message(msg)) => {
                    if socket.send(encode(&msg)).await.is_err() {
                        break;
                    }
                }
                Some(Outbound::Close(reason)) => {
                    close(&mut socket, reason).await;
                    break;
                }
                None => break,
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(text))) => {
                    let cmd = match parse_client_message(&text).and_then(|input| input.action()) {
                        Ok(action) => Command::Input { conn, action },
                        Err(message) => Command::Reject { conn, error: ErrorPayload::new("bad_message", message) },
                    };
                    if entry.commands.send(cmd).is_err() {
                        break;
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
    let _ = entry.commands.send(Command::Detach { conn });
}
