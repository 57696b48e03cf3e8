//! Game-wide tunables shared by the engine, the text provider and the orchestrator.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of extra obstacles a Black candy drops on the map.
pub const BLACK_CANDY_OBSTACLES: u32 = 3;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid game config: {0}")]
pub struct ConfigError(pub String);

/// Knobs for one session. Every field has a default matching the original game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameConfig {
    /// Tiles per side of the square map.
    pub map_size: u32,
    pub initial_lives: u32,
    pub initial_snake_length: u32,
    /// Milliseconds per movement step.
    #[serde(alias = "tick_interval")]
    pub tick_interval_ms: u64,
    pub pause_seconds: u32,
    /// Pause length when a self-written text is on offer.
    pub self_write_pause_seconds: u32,
    pub obstacles_per_turn: u32,
    pub option_word_limit: usize,
    pub ending_word_limit: usize,
    pub temperature_low: f64,
    pub temperature_high: f64,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            map_size: 15,
            initial_lives: 3,
            initial_snake_length: 3,
            tick_interval_ms: 167,
            pause_seconds: 25,
            self_write_pause_seconds: 45,
            obstacles_per_turn: 3,
            option_word_limit: 30,
            ending_word_limit: 80,
            temperature_low: 0.6,
            temperature_high: 1.4,
        }
    }
}

impl GameConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("map_size", self.map_size as u64),
            ("initial_lives", self.initial_lives as u64),
            ("initial_snake_length", self.initial_snake_length as u64),
            ("tick_interval", self.tick_interval_ms),
            ("pause_seconds", self.pause_seconds as u64),
            ("self_write_pause_seconds", self.self_write_pause_seconds as u64),
            ("obstacles_per_turn", self.obstacles_per_turn as u64),
            ("option_word_limit", self.option_word_limit as u64),
            ("ending_word_limit", self.ending_word_limit as u64),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(ConfigError(format!("{name} must be positive")));
            }
        }
        if self.map_size < 3 {
            return Err(ConfigError("map_size must be at least 3".into()));
        }
        // The opening snake lies horizontally, head on the centre tile.
        if self.initial_snake_length > self.map_size / 2 + 1 {
            return Err(ConfigError(format!(
                "initial_snake_length {} does not fit left of the centre of a {}-tile map",
                self.initial_snake_length, self.map_size
            )));
        }
        if !(self.temperature_low.is_finite() && self.temperature_high.is_finite()) {
            return Err(ConfigError("temperatures must be finite".into()));
        }
        if self.temperature_low < 0.0 || self.temperature_low >= self.temperature_high {
            return Err(ConfigError(
                "temperature_low must be non-negative and below temperature_high".into(),
            ));
        }
        if self.pause_seconds >= self.self_write_pause_seconds {
            return Err(ConfigError(
                "pause_seconds must be below self_write_pause_seconds".into(),
            ));
        }
        // Ending needs room for the fixed suffix plus at least one word.
        if self.ending_word_limit <= crate::provider::ENDING_SUFFIX_WORDS {
            return Err(ConfigError(format!(
                "ending_word_limit must exceed {}",
                crate::provider::ENDING_SUFFIX_WORDS
            )));
        }
        Ok(())
    }

    pub fn tile_count(&self) -> u32 {
        self.map_size * self.map_size
    }

    pub fn pause_ms(&self, self_write: bool) -> u64 {
        let secs = if self_write {
            self.self_write_pause_seconds
        } else {
            self.pause_seconds
        };
        secs as u64 * 1000
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let config = GameConfig::default();
        config.validate().unwrap();
        assert_eq!(config.tile_count(), 225);
        assert_eq!(config.pause_ms(false), 25_000);
        assert_eq!(config.pause_ms(true), 45_000);
    }

    #[test]
    fn rejects_each_bound() {
        let cases: Vec<(GameConfig, &str)> = vec![
            (GameConfig { initial_lives: 0, ..Default::default() }, "initial_lives"),
            (GameConfig { map_size: 0, ..Default::default() }, "map_size"),
            (
                GameConfig { temperature_low: 1.4, temperature_high: 0.6, ..Default::default() },
                "temperature_low",
            ),
            (
                GameConfig { pause_seconds: 45, ..Default::default() },
                "pause_seconds",
            ),
            (
                GameConfig { initial_snake_length: 9, ..Default::default() },
                "initial_snake_length",
            ),
        ];
        for (config, needle) in cases {
            let err = config.validate().unwrap_err();
            assert!(err.0.contains(needle), "{err} should mention {needle}");
        }
    }

    #[test]
    fn partial_json_fills_defaults() {
        let config: GameConfig = serde_json::from_str(r#"{"tick_interval": 5}"#).unwrap();
        assert_eq!(config.tick_interval_ms, 5);
        assert_eq!(config.map_size, 15);
    }
}
