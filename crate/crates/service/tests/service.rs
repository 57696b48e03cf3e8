use std::net::SocketAddr;
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use snake_story::log::replay;
use snake_story::provider::ENDING_SUFFIX;
use snake_story::{parse_log, ProviderConfig, SessionVersion};
use snake_story_service::{router, AppState, ServiceConfig};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Socket = WebSocketStream<MaybeTlsStream<TcpStream>>;

struct Server {
    addr: SocketAddr,
    _logs: tempfile::TempDir,
}

impl Server {
    async fn start(grace: Duration) -> Self {
        let logs = tempfile::tempdir().unwrap();
        let config = ServiceConfig {
            logs_dir: logs.path().to_path_buf(),
            offline_by_default: false,
            provider: ProviderConfig {
                base_url: "http://127.0.0.1:9".into(),
                api_key_env: "SNAKE_SERVICE_TEST_NO_KEY".into(),
                ..ProviderConfig::default()
            },
            reconnect_grace: grace,
        };
        let app = router(AppState::new(config).unwrap());
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
        Self { addr, _logs: logs }
    }

    fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }

    async fn create(&self, body: Value) -> (u16, Value) {
        let response = reqwest::Client::new().post(self.url("/sessions")).json(&body).send().await.unwrap();
        let status = response.status().as_u16();
        (status, response.json().await.unwrap())
    }

    async fn create_offline(&self, version: &str, extra: Value) -> String {
        let mut body = json!({ "version": version, "offline": true, "seed": 5 });
        if let (Some(b), Some(e)) = (body.as_object_mut(), extra.as_object()) {
            b.extend(e.clone());
        }
        let (status, created) = self.create(body).await;
        assert_eq!(status, 201, "{created}");
        created["session_id"].as_str().unwrap().to_string()
    }

    async fn connect(&self, id: &str) -> Socket {
        let (socket, _) = connect_async(format!("ws://{}/sessions/{id}/ws", self.addr)).await.unwrap();
        socket
    }

    async fn log(&self, id: &str) -> (u16, String) {
        let response = reqwest::get(self.url(&format!("/sessions/{id}/log"))).await.unwrap();
        (response.status().as_u16(), response.text().await.unwrap())
    }

    async fn index(&self) -> Vec<Value> {
        reqwest::get(self.url("/sessions")).await.unwrap().json().await.unwrap()
    }
}

/// Next server message, or `None` once the socket closes.
async fn next(socket: &mut Socket) -> Option<Value> {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(20), socket.next()).await.expect("server went quiet");
        match msg {
            Some(Ok(Message::Text(text))) => return Some(serde_json::from_str(&text).unwrap()),
            Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return None,
            Some(Ok(_)) => {}
        }
    }
}

async fn next_of(socket: &mut Socket, kind: &str) -> Value {
    loop {
        let msg = next(socket).await.unwrap_or_else(|| panic!("closed while waiting for {kind}"));
        if msg["kind"] == kind {
            return msg;
        }
    }
}

async fn send(socket: &mut Socket, input: Value) {
    socket.send(Message::Text(input.to_string().into())).await.unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn creates_distinct_sessions_and_lists_them() {
    let server = Server::start(Duration::from_secs(120)).await;
    let a = server.create_offline("game", json!({})).await;
    let b = server.create_offline("game", json!({})).await;
    assert_ne!(a, b);
    let c = server.create_offline("nongame", json!({})).await;
    let index = server.index().await;
    assert_eq!(index.len(), 3);
    let row = index.iter().find(|r| r["session_id"] == c.as_str()).unwrap();
    assert_eq!(row["version"], "nongame");
    assert_eq!(row["status"], "active");
    let (status, created) = server.create(json!({ "version": "game", "offline": true })).await;
    assert_eq!(status, 201);
    assert_eq!(created["wire"], "wire_v1");
    assert_eq!(created["ws_url"], format!("/sessions/{}/ws", created["session_id"].as_str().unwrap()));
}

#[tokio::test(flavor = "multi_thread")]
async fn online_without_key_is_unavailable() {
    let server = Server::start(Duration::from_secs(120)).await;
    let (status, body) = server.create(json!({ "version": "nongame" })).await;
    assert_eq!(status, 503);
    assert!(body["error"].as_str().unwrap().contains("SNAKE_SERVICE_TEST_NO_KEY"), "{body}");
}

#[tokio::test(flavor = "multi_thread")]
async fn bad_requests_are_rejected() {
    let server = Server::start(Duration::from_secs(120)).await;
    let (status, _) = server.create(json!({ "version": "arcade" })).await;
    assert_eq!(status, 400);
    let (status, body) = server.create(json!({ "version": "game", "offline": true, "config": { "map_size": 2 } })).await;
    assert_eq!(status, 400);
    assert!(body["error"].as_str().unwrap().contains("map_size"));
    let (status, _) = server.create(json!({ "version": "game", "colour": "red" })).await;
    assert_eq!(status, 400);
}

#[tokio::test(flavor = "multi_thread")]
async fn unknown_sessions_are_not_found() {
    let server = Server::start(Duration::from_secs(120)).await;
    assert_eq!(server.log("00000000-0000-0000-0000-000000000000").await.0, 404);
    assert_eq!(server.log("not-a-uuid").await.0, 404);
    let ws = connect_async(format!("ws://{}/sessions/{}/ws", server.addr, uuid::Uuid::nil())).await;
    assert!(ws.is_err());
}

#[tokio::test(flavor = "multi_thread")]
async fn serves_the_browser_client() {
    let server = Server::start(Duration::from_secs(120)).await;
    let page = reqwest::get(server.url("/")).await.unwrap().text().await.unwrap();
    assert!(page.contains("<canvas id=\"board\""));
    let script = reqwest::get(server.url("/app.js")).await.unwrap();
    assert_eq!(script.status().as_u16(), 200);
}

#[tokio::test(flavor = "multi_thread")]
async fn nongame_session_over_the_socket() {
    let server = Server::start(Duration::from_secs(120)).await;
    let id = server.create_offline("nongame", json!({})).await;
    let mut socket = server.connect(&id).await;
    let state = next_of(&mut socket, "state").await;
    assert_eq!(state["payload"]["version"], "nongame");
    assert!(state["payload"]["game"].is_null());
    let first = next_of(&mut socket, "options").await;
    assert_eq!(first["payload"]["turn"], 0);
    assert_eq!(first["payload"]["options"][0]["temperature"], 0.6);

    send(&mut socket, json!({ "choose_slot": 0 })).await;
    let second = next_of(&mut socket, "options").await;
    assert_eq!(second["payload"]["turn"], 1);
    assert!(second["seq"].as_u64() > first["seq"].as_u64());

    send(&mut socket, json!({ "steer": "up" })).await;
    let error = next_of(&mut socket, "error").await;
    assert_eq!(error["payload"]["code"], "wrong_version");

    send(&mut socket, json!({ "kind": "input", "payload": { "self_text": "The snake is dead." } })).await;
    assert_eq!(next_of(&mut socket, "options").await["payload"]["turn"], 2);

    let (status, partial) = server.log(&id).await;
    assert_eq!(status, 200);
    let trace = parse_log(&partial, Some(SessionVersion::NonGame)).unwrap();
    assert!(!trace.is_complete());

    send(&mut socket, json!({ "end_story": true })).await;
    let result = next_of(&mut socket, "result").await;
    let story = result["payload"]["full_story"].as_str().unwrap().to_string();
    assert!(story.ends_with(ENDING_SUFFIX));
    assert!(story.contains("The snake is dead."));
    assert!(next(&mut socket).await.is_none());

    let (_, log) = server.log(&id).await;
    let trace = parse_log(&log, Some(SessionVersion::NonGame)).unwrap();
    assert!(log.starts_with(&partial));
    assert_eq!(replay(&trace).unwrap().story(), story);
    let row = server.index().await.into_iter().find(|r| r["session_id"] == id.as_str()).unwrap();
    assert_eq!(row["status"], "ended");
}

#[tokio::test(flavor = "multi_thread")]
async fn steering_during_pause_is_an_error() {
    let server = Server::start(Duration::from_secs(120)).await;
    let id = server.create_offline("game", json!({})).await;
    let mut socket = server.connect(&id).await;
    let pause = next_of(&mut socket, "pause").await;
    assert_eq!(pause["payload"]["total_ms"], 25_000);
    send(&mut socket, json!({ "steer": "up" })).await;
    let error = next_of(&mut socket, "error").await;
    assert_eq!(error["payload"]["code"], "not_moving");
    assert!(error["payload"]["message"].as_str().unwrap().starts_with("not moving"));

    send(&mut socket, json!({ "choose_slot": 1 })).await;
    assert_eq!(next_of(&mut socket, "error").await["payload"]["code"], "wrong_version");
    send(&mut socket, json!({ "steer": "up", "end_pause": true })).await;
    assert_eq!(next_of(&mut socket, "error").await["payload"]["code"], "bad_message");

    send(&mut socket, json!({ "end_pause": true })).await;
    loop {
        let state = next_of(&mut socket, "state").await;
        if state["payload"]["game"]["phase"]["phase"] == "moving" {
            break;
        }
    }
    send(&mut socket, json!({ "steer": "up" })).await;
    let state = next_of(&mut socket, "state").await;
    assert_eq!(state["payload"]["game"]["heading"], "up");
}

#[tokio::test(flavor = "multi_thread")]
async fn full_game_over_the_socket() {
    let server = Server::start(Duration::from_secs(120)).await;
    let id = server.create_offline("game", json!({ "config": { "tick_interval_ms": 5 } })).await;
    let mut socket = server.connect(&id).await;
    let mut last_seq = 0;
    let mut last_state = Value::Null;
    let mut result = Value::Null;
    let mut events = 0;
    while let Some(msg) = next(&mut socket).await {
        let seq = msg["seq"].as_u64().unwrap();
        assert!(seq > last_seq, "seq {seq} after {last_seq}");
        last_seq = seq;
        match msg["kind"].as_str().unwrap() {
            "pause" => {
                if msg["payload"]["self_write_enabled"] == true {
                    send(&mut socket, json!({ "self_text": "The snake hummed." })).await;
                }
                send(&mut socket, json!({ "end_pause": true })).await;
            }
            "state" => last_state = msg["payload"].clone(),
            "event" => events += 1,
            "result" => result = msg["payload"].clone(),
            _ => {}
        }
    }
    assert!(events > 0);
    let game = &last_state["game"];
    assert_eq!(game["lives"], 0);
    assert_eq!(result["snake_length"], game["snake"].as_array().unwrap().len());
    assert_eq!(result["full_story"], last_state["story"]);

    let (_, log) = server.log(&id).await;
    let trace = parse_log(&log, Some(SessionVersion::Game)).unwrap();
    assert!(trace.is_complete());
    let replayed = replay(&trace).unwrap();
    assert_eq!(replayed.story(), result["full_story"].as_str().unwrap());
    let eaten: serde_json::Map<String, Value> = result["candies_eaten"].as_object().unwrap().clone();
    let total: u64 = eaten.values().map(|v| v.as_u64().unwrap()).sum();
    assert_eq!(Some(total as u32), replayed.ate);
    for (kind, count) in &replayed.eaten {
        let key = serde_json::to_value(kind).unwrap();
        assert_eq!(eaten[key.as_str().unwrap()].as_u64(), Some(u64::from(*count)));
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn second_socket_takes_over() {
    let server = Server::start(Duration::from_secs(120)).await;
    let id = server.create_offline("nongame", json!({})).await;
    let mut first = server.connect(&id).await;
    next_of(&mut first, "options").await;
    let mut second = server.connect(&id).await;
    let notice = next_of(&mut first, "event").await;
    assert_eq!(notice["payload"]["type"], "takeover");
    assert!(next(&mut first).await.is_none());

    let options = next_of(&mut second, "options").await;
    assert_eq!(options["payload"]["turn"], 0);
    assert!(options["seq"].as_u64() > notice["seq"].as_u64());
    send(&mut second, json!({ "choose_slot": 1 })).await;
    assert_eq!(next_of(&mut second, "options").await["payload"]["turn"], 1);
}

#[tokio::test(flavor = "multi_thread")]
async fn reconnect_within_grace_resumes() {
    let server = Server::start(Duration::from_secs(2)).await;
    let id = server.create_offline("game", json!({})).await;
    let mut socket = server.connect(&id).await;
    next_of(&mut socket, "pause").await;
    socket.close(None).await.unwrap();
    tokio::time::sleep(Duration::from_millis(300)).await;
    let mut again = server.connect(&id).await;
    let state = next_of(&mut again, "state").await;
    assert_eq!(state["payload"]["status"], "active");
    assert_eq!(state["payload"]["game"]["phase"]["phase"], "paused");
}

#[tokio::test(flavor = "multi_thread")]
async fn abandoned_session_ends_after_grace() {
    let server = Server::start(Duration::from_millis(300)).await;
    let id = server.create_offline("game", json!({})).await;
    let mut socket = server.connect(&id).await;
    next_of(&mut socket, "pause").await;
    socket.close(None).await.unwrap();
    tokio::time::sleep(Duration::from_millis(1200)).await;
    let row = server.index().await.into_iter().find(|r| r["session_id"] == id.as_str()).unwrap();
    assert_eq!(row["status"], "ended");
    let (_, log) = server.log(&id).await;
    let trace = parse_log(&log, Some(SessionVersion::Game)).unwrap();
    assert!(trace.is_complete());
    assert_eq!(trace.ate(), Some(0));

    let mut late = server.connect(&id).await;
    let result = next_of(&mut late, "result").await;
    assert!(result["payload"]["full_story"].as_str().unwrap().ends_with(ENDING_SUFFIX));
}
