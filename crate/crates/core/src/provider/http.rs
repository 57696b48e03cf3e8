//! Blocking client for an OpenAI-compatible `/completions` endpoint.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, OnceLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{ProviderConfig, ProviderError};

#[derive(Debug, Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    temperature: f64,
    max_tokens: u32,
    n: u32,
}

#[derive(Debug, Deserialize)]
struct CompletionResponse {
    choices: Vec<CompletionChoice>,
}

#[derive(Debug, Deserialize)]
struct CompletionChoice {
    text: Option<String>,
}

pub(crate) struct HttpBackend {
    client: OnceLock<Result<reqwest::blocking::Client, String>>,
    // Calls are serialized; upstream rate limits are per key.
    gate: Mutex<()>,
    requests: AtomicU64,
}

impl HttpBackend {
    pub(crate) fn new() -> Self {
        Self { client: OnceLock::new(), gate: Mutex::new(()), requests: AtomicU64::new(0) }
    }

    pub(crate) fn requests(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }

    fn client(&self, config: &ProviderConfig) -> Result<&reqwest::blocking::Client, ProviderError> {
        self.client
            .get_or_init(|| {
                reqwest::blocking::Client::builder()
                    .timeout(Duration::from_secs(config.timeout_seconds))
                    .build()
                    .map_err(|e| e.to_string())
            })
            .as_ref()
            .map_err(|e| ProviderError::Unavailable(format!("http client: {e}")))
    }

    pub(crate) fn complete(
        &self,
        config: &ProviderConfig,
        prompt: &str,
        temperature: f64,
        max_tokens: u32,
    ) -> Result<String, ProviderError> {
        let key = config.api_key()?;
        let client = self.client(config)?;
        let url = format!("{}/completions", config.base_url.trim_end_matches('/'));
        let body = CompletionRequest { model: &config.model_name, prompt, temperature, max_tokens, n: 1 };

        let _guard = self.gate.lock().unwrap_or_else(|poisoned| poisoned.into_inner());
        let mut last_error = ProviderError::Unavailable("no attempt made".into());
        for _attempt in 0..=config.retries {
            self.requests.fetch_add(1, Ordering::Relaxed);
            let response = match client.post(&url).bearer_auth(&key).json(&body).send() {
                Ok(response) => response,
                Err(e) => {
                    last_error = ProviderError::Unavailable(e.to_string());
                    continue;
                }
            };
            let status = response.status();
            if status.is_server_error() || status.as_u16() == 429 {
                last_error = ProviderError::Unavailable(format!("{url} answered {status}"));
                continue;
            }
            if !status.is_success() {
                let detail = response.text().unwrap_or_default();
                return Err(ProviderError::Unavailable(format!("{url} answered {status}: {detail}")));
            }
            let parsed: CompletionResponse = response
                .json()
                .map_err(|e| ProviderError::Protocol(format!("unreadable completion: {e}")))?;
            return parsed
                .choices
                .into_iter()
                .next()
                .and_then(|c| c.text)
                .ok_or_else(|| ProviderError::Protocol("completion has no choices[0].text".into()));
        }
        Err(last_error)
    }
}
