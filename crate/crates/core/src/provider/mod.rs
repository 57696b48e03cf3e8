//! Story text sources: two temperature-contrasted options per turn and the ending.
//!
//! The low-temperature option always fills slot 0 and the high-temperature one
//! slot 1. Both go through the same word cap whether they come from the HTTP
//! backend or the offline generator.

mod http;
mod offline;
mod words;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::GameConfig;
use http::HttpBackend;

pub use offline::offline_generate;
pub use words::{
    count_words, enforce_ending, enforce_option, truncate_words, ENDING_SUFFIX, ENDING_SUFFIX_WORDS,
};

/// Topic line every prompt starts with.
pub const PROMPT_PREFIX: &str = "writing a story of a snake";
/// Continuation prompt; `{story}` is replaced by the story so far.
pub const OPTION_PROMPT_TEMPLATE: &str = "writing a story of a snake\n\n{story}";
/// Ending prompt; `{story}` and `{limit}` are substituted.
pub const ENDING_PROMPT_TEMPLATE: &str = "writing a story of a snake\n\n{story}\n\n\
Finish this story in at most {limit} words. The last words must be \", and the story of the snake ends\".\n\n";
/// Completion tokens requested per allowed word; the word cap is enforced afterwards.
pub const TOKENS_PER_WORD: f64 = 2.2;

const ENDING_STREAM: u64 = 0x656e_6469_6e67;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("text provider unavailable: {0}")]
    Unavailable(String),
    #[error("text provider protocol error: {0}")]
    Protocol(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("invalid provider config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TextOrigin {
    Model,
    OfflineStub,
    Player,
}

/// One continuation on offer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextOption {
    pub text: String,
    pub temperature: f64,
    pub word_count: usize,
    pub origin: TextOrigin,
}

impl TextOption {
    pub fn new(text: String, temperature: f64, origin: TextOrigin) -> Self {
        let word_count = count_words(&text);
        Self { text, temperature, word_count, origin }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    pub base_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_seconds: u64,
    pub retries: u32,
    pub offline: bool,
    pub offline_seed: u64,
    pub option_template: String,
    pub ending_template: String,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            model_name: "gpt-3.5-turbo-instruct".into(),
            api_key_env: "SNAKE_STORY_API_KEY".into(),
            timeout_seconds: 30,
            retries: 1,
            offline: false,
            offline_seed: 0,
            option_template: OPTION_PROMPT_TEMPLATE.into(),
            ending_template: ENDING_PROMPT_TEMPLATE.into(),
        }
    }
}

impl ProviderConfig {
    pub fn offline(seed: u64) -> Self {
        Self { offline: true, offline_seed: seed, ..Self::default() }
    }

    /// Applies `SNAKE_STORY_API_BASE` and `SNAKE_STORY_MODEL` when set.
    pub fn with_env_overrides(mut self) -> Self {
        if let Ok(base) = std::env::var("SNAKE_STORY_API_BASE") {
            if !base.trim().is_empty() {
                self.base_url = base;
            }
        }
        if let Ok(model) = std::env::var("SNAKE_STORY_MODEL") {
            if !model.trim().is_empty() {
                self.model_name = model;
            }
        }
        self
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.timeout_seconds == 0 {
            return Err(ProviderError::Config("timeout_seconds must be positive".into()));
        }
        if !self.offline && self.base_url.trim().is_empty() {
            return Err(ProviderError::Config("base_url is empty".into()));
        }
        Ok(())
    }

    pub(crate) fn api_key(&self) -> Result<String, ProviderError> {
        match std::env::var(&self.api_key_env) {
            Ok(key) if !key.trim().is_empty() => Ok(key),
            _ => Err(ProviderError::Unavailable(format!(
                "environment variable {} is not set",
                self.api_key_env
            ))),
        }
    }

    pub fn option_prompt(&self, story: &str) -> String {
        self.option_template.replace("{story}", story)
    }

    pub fn ending_prompt(&self, story: &str, limit: usize) -> String {
        self.ending_template
            .replace("{story}", story)
            .replace("{limit}", &limit.to_string())
    }
}

fn token_budget(words: usize) -> u32 {
    (words as f64 * TOKENS_PER_WORD).ceil() as u32
}

enum Backend {
    Offline,
    Http(HttpBackend),
}

/// Shared handle to a text source. Safe to use from many sessions at once.
pub struct TextProvider {
    config: ProviderConfig,
    backend: Backend,
}

impl std::fmt::Debug for TextProvider {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TextProvider")
            .field("offline", &self.is_offline())
            .field("model", &self.config.model_name)
            .finish()
    }
}

impl TextProvider {
    pub fn new(config: ProviderConfig) -> Result<Self, ProviderError> {
        config.validate()?;
        let backend = if config.offline { Backend::Offline } else { Backend::Http(HttpBackend::new()) };
        Ok(Self { config, backend })
    }

    pub fn offline(seed: u64) -> Self {
        Self::new(ProviderConfig::offline(seed)).expect("offline config is valid")
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    pub fn is_offline(&self) -> bool {
        matches!(self.backend, Backend::Offline)
    }

    /// HTTP requests issued so far; always zero offline.
    pub fn network_requests(&self) -> u64 {
        match &self.backend {
            Backend::Offline => 0,
            Backend::Http(http) => http.requests(),
        }
    }

    /// Fails fast when the online backend cannot possibly work (no API key).
    pub fn check_ready(&self) -> Result<(), ProviderError> {
        match self.backend {
            Backend::Offline => Ok(()),
            Backend::Http(_) => self.config.api_key().map(|_| ()),
        }
    }

    fn raw_text(
        &self,
        prompt: impl FnOnce() -> String,
        offline_seed: u64,
        story: &str,
        temperature: f64,
        words: usize,
    ) -> Result<(String, TextOrigin), ProviderError> {
        match &self.backend {
            Backend::Offline => Ok((
                offline_generate(offline_seed, story, temperature, words),
                TextOrigin::OfflineStub,
            )),
            Backend::Http(http) => {
                let text = http.complete(&self.config, &prompt(), temperature, token_budget(words))?;
                Ok((text, TextOrigin::Model))
            }
        }
    }

    /// Two continuations of `story`: slot 0 at the low temperature, slot 1 at the high one.
    pub fn generate_options(
        &self,
        story: &str,
        game: &GameConfig,
    ) -> Result<(TextOption, TextOption), ProviderError> {
        let make = |temperature: f64| -> Result<TextOption, ProviderError> {
            let (raw, origin) = self.raw_text(
                || self.config.option_prompt(story),
                self.config.offline_seed,
                story,
                temperature,
                game.option_word_limit,
            )?;
            let text = enforce_option(&raw, game.option_word_limit);
            if text.trim().is_empty() {
                return Err(ProviderError::Protocol("empty continuation".into()));
            }
            Ok(TextOption::new(text, temperature, origin))
        };
        Ok((make(game.temperature_low)?, make(game.temperature_high)?))
    }

    /// Closing passage for `story`, capped at the ending word limit and always
    /// finishing with [`ENDING_SUFFIX`].
    pub fn generate_ending(&self, story: &str, game: &GameConfig) -> Result<String, ProviderError> {
        if story.trim().is_empty() {
            return Err(ProviderError::Precondition("cannot end an empty story".into()));
        }
        let limit = game.ending_word_limit;
        let (raw, _) = self.raw_text(
            || self.config.ending_prompt(story, limit),
            self.config.offline_seed ^ ENDING_STREAM,
            story,
            game.temperature_low,
            limit,
        )?;
        Ok(enforce_ending(&raw, limit))
    }
}
