//! Story fragments and how they are stitched together.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SessionVersion {
    #[serde(alias = "non_game", alias = "non-game")]
    NonGame,
    Game,
}

impl SessionVersion {
    pub fn as_str(self) -> &'static str {
        match self {
            SessionVersion::NonGame => "nongame",
            SessionVersion::Game => "game",
        }
    }
}

impl std::fmt::Display for SessionVersion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SessionVersion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "game" => Ok(SessionVersion::Game),
            "nongame" | "non-game" | "non_game" => Ok(SessionVersion::NonGame),
            other => Err(format!("unknown version {other:?}")),
        }
    }
}

/// Where an appended fragment came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FragmentOrigin {
    /// Low-temperature option.
    Slot0,
    /// High-temperature option.
    Slot1,
    /// Written by the player.
    SelfText,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fragment {
    pub text: String,
    pub origin: FragmentOrigin,
}

fn needs_space(prev: &str, next: &str) -> bool {
    let Some(last) = prev.chars().last() else { return false };
    let Some(first) = next.chars().next() else { return false };
    !last.is_whitespace()
        && !first.is_whitespace()
        && !matches!(first, ',' | '.' | ';' | ':' | '!' | '?' | ')' | '\'' | '"' | '-')
}

/// Joins parts in order, inserting a single space only where two words would
/// otherwise run together. Text is never rewritten.
pub fn assemble_story<'a>(parts: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for part in parts {
        if part.is_empty() {
            continue;
        }
        if needs_space(&out, part) {
            out.push(' ');
        }
        out.push_str(part);
    }
    out
}
