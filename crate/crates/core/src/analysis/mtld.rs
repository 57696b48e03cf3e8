//! Measure of textual lexical diversity, averaged over a forward and a backward pass.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::AnalysisError;

pub const MTLD_THRESHOLD: f64 = 0.72;
/// Inputs shorter than this are returned as their token count, flagged.
pub const MTLD_MIN_TOKENS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MtldFlag {
    ShortText,
    /// The type-token ratio never fell below the threshold.
    NoFactors,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtldResult {
    pub value: f64,
    pub forward_factors: f64,
    pub backward_factors: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<MtldFlag>,
}

/// Full factors plus the partial factor left at the end.
fn factors<'a>(tokens: impl Iterator<Item = &'a str>, threshold: f64) -> f64 {
    let mut types = HashSet::new();
    let mut count = 0usize;
    let mut full = 0.0;
    for token in tokens {
        count += 1;
        types.insert(token);
        if (types.len() as f64 / count as f64) < threshold {
            full += 1.0;
            types.clear();
            count = 0;
        }
    }
    if count == 0 {
        return full;
    }
    let ttr = types.len() as f64 / count as f64;
    full + (1.0 - ttr) / (1.0 - threshold)
}

pub fn mtld<S: AsRef<str>>(tokens: &[S], threshold: f64) -> Result<MtldResult, AnalysisError> {
    if tokens.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(AnalysisError::InvalidArgument(format!("threshold {threshold} outside (0, 1)")));
    }
    let n = tokens.len() as f64;
    if tokens.len() < MTLD_MIN_TOKENS {
        return Ok(MtldResult { value: n, forward_factors: 0.0, backward_factors: 0.0, flag: Some(MtldFlag::ShortText) });
    }
    let forward = factors(tokens.iter().map(AsRef::as_ref), threshold);
    let backward = factors(tokens.iter().rev().map(AsRef::as_ref), threshold);
    if forward == 0.0 || backward == 0.0 {
        return Ok(MtldResult {
            value: n,
            forward_factors: forward,
            backward_factors: backward,
            flag: Some(MtldFlag::NoFactors),
        });
    }
    Ok(MtldResult {
        value: (n / forward + n / backward) / 2.0,
        forward_factors: forward,
        backward_factors: backward,
        flag: None,
    })
}

/// Lowercased word tokens with surrounding punctuation removed.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}
