//! Quantitative pipeline over session logs: usage counts, paired signed-rank
//! tests and story text metrics.

mod mtld;
mod overlap;
mod usage;
mod wilcoxon;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::log::{replay, SessionTrace};
use crate::provider::count_words;
use crate::story::SessionVersion;

pub use mtld::{mtld, tokenize, MtldFlag, MtldResult, MTLD_MIN_TOKENS, MTLD_THRESHOLD};
pub use overlap::{content_words, sentence_overlap, split_sentences, SentenceOverlap, STOPWORDS_VERSION};
pub use usage::{session_usage, usage_stats, CohortUsage, Grouping, SessionUsage, Summary, UsageStats};
pub use wilcoxon::{
    wilcoxon_signed_rank, PairedSample, WilcoxonMethod, WilcoxonMode, WilcoxonResult, EXACT_MAX_N,
};

pub const REPORT_SCHEMA: &str = "report_v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("no pairs to test")]
    NoPairs,
    #[error("pair {0} has a non-finite value")]
    NonFinite(String),
    #[error("every paired difference is zero")]
    AllZero,
    #[error("exact test supports at most {max} non-zero pairs, got {n}")]
    ExactTooLarge { n: usize, max: usize },
    #[error("input is empty")]
    EmptyInput,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("traces mix game and non-game sessions; group them by version")]
    MixedVersions,
}

/// Whitespace-delimited word count.
pub fn story_word_count(story: &str) -> usize {
    count_words(story)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextMetrics {
    pub word_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mtld: Option<MtldResult>,
    pub sentence_overlap: SentenceOverlap,
}

pub fn text_metrics(story: &str) -> TextMetrics {
    let tokens = tokenize(story);
    TextMetrics {
        word_count: story_word_count(story),
        mtld: mtld(&tokens, MTLD_THRESHOLD).ok(),
        sentence_overlap: sentence_overlap(story),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub participant: Option<String>,
    pub version: SessionVersion,
    pub usage: SessionUsage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<TextMetrics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replay_error: Option<String>,
}

/// Signed-rank test of one metric, non-game (`a`) against game (`b`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub metric: String,
    pub pairs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<WilcoxonResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub grouping: Grouping,
    pub stopwords_version: String,
    pub sessions: Vec<SessionReport>,
    pub cohorts: Vec<CohortUsage>,
    pub comparisons: Vec<Comparison>,
}

/// Participant id from a log file name: `p11.game.log`, `nongame_p11.log` and
/// `P11-nongame.log` all map to their id with the version words removed.
pub fn participant_label(source: &str) -> Option<String> {
    let name = std::path::Path::new(source).file_name()?.to_str()?;
    let stem = name.strip_suffix(".log").unwrap_or(name);
    let parts: Vec<&str> = stem
        .split(['.', '_', '-'])
        .filter(|p| !p.is_empty())
        .filter(|p| !matches!(p.to_ascii_lowercase().as_str(), "game" | "nongame" | "non"))
        .collect();
    (!parts.is_empty()).then(|| parts.join("_"))
}

type Metric = (&'static str, fn(&SessionReport) -> Option<f64>);

const METRICS: [Metric; 8] = [
    ("total_choices", |s| Some(f64::from(s.usage.total_choices))),
    ("low_temp_choices", |s| Some(f64::from(s.usage.low_temp_choices))),
    ("high_temp_choices", |s| Some(f64::from(s.usage.high_temp_choices))),
    ("self_writes", |s| Some(f64::from(s.usage.self_writes))),
    ("mean_decision_seconds", |s| s.usage.mean_decision_seconds),
    ("word_count", |s| s.text.as_ref().map(|t| t.word_count as f64)),
    ("mtld", |s| s.text.as_ref().and_then(|t| t.mtld.as_ref()).map(|m| m.value)),
    ("sentence_overlap", |s| s.text.as_ref().and_then(|t| t.sentence_overlap.value)),
];

fn compare(sessions: &[SessionReport]) -> Vec<Comparison> {
    let mut by_label: std::collections::BTreeMap<&str, (Vec<&SessionReport>, Vec<&SessionReport>)> =
        Default::default();
    for s in sessions {
        if let Some(label) = &s.participant {
            let entry = by_label.entry(label).or_default();
            match s.version {
                SessionVersion::NonGame => entry.0.push(s),
                SessionVersion::Game => entry.1.push(s),
            }
        }
    }
    let matched: Vec<(&str, &SessionReport, &SessionReport)> = by_label
        .iter()
        .filter(|(_, (a, b))| a.len() == 1 && b.len() == 1)
        .map(|(label, (a, b))| (*label, a[0], b[0]))
        .collect();
    if matched.is_empty() {
        return Vec::new();
    }
    METRICS
        .iter()
        .map(|(name, get)| {
            let pairs: Vec<PairedSample> = matched
                .iter()
                .filter_map(|(label, a, b)| Some(PairedSample::new(*label, get(a)?, get(b)?)))
                .collect();
            let (result, error) = match wilcoxon_signed_rank(&pairs, WilcoxonMode::Auto) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Comparison { metric: (*name).to_string(), pairs: pairs.len(), result, error }
        })
        .collect()
}

/// Everything `analyze` prints. Paired comparisons appear when grouping by
/// version and some participant has exactly one log of each version.
pub fn build_report(traces: &[SessionTrace], grouping: Grouping) -> Result<Report, AnalysisError> {
    let usage = usage_stats(traces, grouping)?;
    let sessions: Vec<SessionReport> = traces
        .iter()
        .zip(usage.sessions)
        .map(|(trace, usage)| {
            let (text, replay_error) = match replay(trace) {
                Ok(replayed) => (Some(text_metrics(&replayed.story())), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SessionReport {
                source: trace.source.clone(),
                participant: trace.source.as_deref().and_then(participant_label),
                version: trace.version,
                usage,
                text,
                replay_error,
            }
        })
        .collect();
    let comparisons = if grouping == Grouping::Version { compare(&sessions) } else { Vec::new() };
    Ok(Report {
        schema: REPORT_SCHEMA.to_string(),
        grouping,
        stopwords_version: STOPWORDS_VERSION.to_string(),
        sessions,
        cohorts: usage.cohorts,
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_count_examples() {
        assert_eq!(story_word_count(""), 0);
        assert_eq!(story_word_count("a b  c"), 3);
    }

    #[test]
    fn participant_labels() {
        assert_eq!(participant_label("logs/game_p11.log").as_deref(), Some("p11"));
        assert_eq!(participant_label("nongame_p11.log").as_deref(), Some("p11"));
        assert_eq!(participant_label("/x/P3.game.log").as_deref(), Some("P3"));
        assert_eq!(participant_label("game.log"), None);
    }

    #[test]
    fn summary_uses_sample_sd() {
        let s = Summary::of(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(s.mean, 5.0);
        assert!((s.sd - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(Summary::of(&[3.0]).sd, 0.0);
    }
}
