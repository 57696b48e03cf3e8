//! The HTTP backend against a throwaway local server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use snake_story::config::GameConfig;
use snake_story::provider::{ProviderConfig, ProviderError, TextOrigin, TextProvider};

/// Serves the given (status, body) responses in order, one per connection,
/// and records request bodies.
fn serve(responses: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>, Arc<AtomicUsize>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    let bodies = Arc::new(Mutex::new(Vec::new()));
    let hits = Arc::new(AtomicUsize::new(0));
    let (bodies2, hits2) = (bodies.clone(), hits.clone());
    thread::spawn(move || {
        for (status, body) in responses {
            let Ok((mut stream, _)) = listener.accept() else { return };
            hits2.fetch_add(1, Ordering::SeqCst);
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap();
                }
            }
            let mut buf = vec![0u8; length];
            reader.read_exact(&mut buf).unwrap();
            bodies2.lock().unwrap().push(String::from_utf8(buf).unwrap());
            let reply = format!(
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    (base, bodies, hits)
}

fn provider(base: &str, key_env: &str, retries: u32) -> TextProvider {
    std::env::set_var(key_env, "test-key");
    TextProvider::new(ProviderConfig {
        base_url: base.to_string(),
        api_key_env: key_env.to_string(),
        retries,
        timeout_seconds: 5,
        ..ProviderConfig::default()
    })
    .unwrap()
}

fn completion(text: &str) -> String {
    serde_json::json!({ "choices": [{ "text": text }] }).to_string()
}

#[test]
fn options_come_from_the_endpoint_in_temperature_order() {
    let long = vec!["scale"; 45].join(" ");
    let (base, bodies, _) = serve(vec![(200, completion(" The snake woke.  ")), (200, completion(&long))]);
    let p = provider(&base, "SNAKE_TEST_KEY_A", 0);
    let (low, high) = p.generate_options("Once", &GameConfig::default()).unwrap();
    assert_eq!(low.text, " The snake woke.");
    assert_eq!(low.origin, TextOrigin::Model);
    assert_eq!(high.word_count, 30);
    let bodies = bodies.lock().unwrap();
    let first: serde_json::Value = serde_json::from_str(&bodies[0]).unwrap();
    let second: serde_json::Value = serde_json::from_str(&bodies[1]).unwrap();
    assert_eq!(first["temperature"], 0.6);
    assert_eq!(second["temperature"], 1.4);
    assert_eq!(first["prompt"], "writing a story of a snake\n\nOnce");
    assert_eq!(first["max_tokens"], 66);
    assert_eq!(p.network_requests(), 2);
}

#[test]
fn server_errors_are_retried() {
    let (base, _, hits) = serve(vec![(503, "{}".into()), (200, completion("It slept, and the story of the snake ends."))]);
    let p = provider(&base, "SNAKE_TEST_KEY_B", 1);
    let ending = p.generate_ending("The snake slept.", &GameConfig::default()).unwrap();
    assert_eq!(ending, "It slept, and the story of the snake ends");
    assert_eq!(hits.load(Ordering::SeqCst), 2);
}

#[test]
fn retries_exhausted_is_unavailable() {
    let (base, _, _) = serve(vec![(500, "{}".into()), (500, "{}".into())]);
    let p = provider(&base, "SNAKE_TEST_KEY_C", 1);
    assert!(matches!(
        p.generate_options("x", &GameConfig::default()),
        Err(ProviderError::Unavailable(_))
    ));
}

#[test]
fn malformed_body_is_a_protocol_error() {
    let (base, _, _) = serve(vec![(200, "{\"choices\": []}".into())]);
    let p = provider(&base, "SNAKE_TEST_KEY_D", 0);
    assert!(matches!(
        p.generate_options("x", &GameConfig::default()),
        Err(ProviderError::Protocol(_))
    ));
}

#[test]
fn client_errors_are_not_retried() {
    let (base, _, hits) = serve(vec![(401, "{\"error\":\"bad key\"}".into()), (200, completion("never"))]);
    let p = provider(&base, "SNAKE_TEST_KEY_E", 3);
    assert!(matches!(
        p.generate_options("x", &GameConfig::default()),
        Err(ProviderError::Unavailable(_))
    ));
    assert_eq!(hits.load(Ordering::SeqCst), 1);
}

#[test]
fn missing_key_fails_before_any_request() {
    let p = TextProvider::new(ProviderConfig {
        base_url: "http://127.0.0.1:9".into(),
        api_key_env: "SNAKE_TEST_KEY_UNSET".into(),
        ..ProviderConfig::default()
    })
    .unwrap();
    assert!(matches!(p.check_ready(), Err(ProviderError::Unavailable(_))));
    assert!(p.generate_options("x", &GameConfig::default()).is_err());
    assert_eq!(p.network_requests(), 0);
}
