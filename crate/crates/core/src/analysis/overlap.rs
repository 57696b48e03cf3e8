//! Adjacent-sentence content-word overlap.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Identifies the embedded stopword list; bump when the list changes.
pub const STOPWORDS_VERSION: &str = "stopwords-v1";

const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same", "she",
    "should", "so", "some", "such", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
    "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceOverlap {
    /// Mean over scored pairs; `None` when fewer than two sentences exist.
    pub value: Option<f64>,
    pub sentences: usize,
    /// Adjacent pairs whose later sentence has at least one content word.
    pub scored_pairs: usize,
}

/// Splits after `.`, `!` or `?` when whitespace and a capital letter (possibly
/// behind an opening quote) follow.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let (_, c) = chars[i];
        if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && matches!(chars[j].1, '"' | '\'' | '\u{201d}' | ')') {
                j += 1;
            }
            let end = chars.get(j).map_or(text.len(), |(b, _)| *b);
            let mut k = j;
            while k < chars.len() && chars[k].1.is_whitespace() {
                k += 1;
            }
            let mut m = k;
            while m < chars.len() && matches!(chars[m].1, '"' | '\'' | '\u{201c}') {
                m += 1;
            }
            if k > j && m < chars.len() && chars[m].1.is_uppercase() {
                sentences.push(text[start..end].trim());
                start = chars[k].0;
                i = k;
                continue;
            }
        }
        i += 1;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        sentences.push(tail);
    }
    sentences.retain(|s| !s.is_empty());
    sentences
}

/// Lowercase, drop a possessive `'s` and a plural `s`.
fn normalize(word: &str) -> String {
    let mut w = word.to_lowercase().replace('\u{2019}', "'");
    if let Some(stem) = w.strip_suffix("'s") {
        w = stem.to_string();
    }
    w = w.trim_end_matches('\'').to_string();
    if w.len() > 4 && w.ends_with("ies") {
        w.truncate(w.len() - 3);
        w.push('y');
    } else if w.len() > 3 && w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") {
        w.pop();
    }
    w
}

pub fn content_words(sentence: &str) -> BTreeSet<String> {
    sentence
        .split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '\u{2019}'))
        .map(|w| w.trim_matches(|c| c == '\'' || c == '\u{2019}'))
        .filter(|w| !w.is_empty() && !STOPWORDS.contains(&w.to_lowercase().as_str()))
        .map(normalize)
        .filter(|w| !w.is_empty() && !STOPWORDS.contains(&w.as_str()))
        .collect()
}

/// Mean over adjacent sentence pairs of shared content words divided by the
/// later sentence's content words.
pub fn sentence_overlap(story: &str) -> SentenceOverlap {
    let sentences = split_sentences(story);
    let words: Vec<BTreeSet<String>> = sentences.iter().map(|s| content_words(s)).collect();
    let scores: Vec<f64> = words
        .windows(2)
        .filter(|pair| !pair[1].is_empty())
        .map(|pair| pair[1].intersection(&pair[0]).count() as f64 / pair[1].len() as f64)
        .collect();
    let value = if sentences.len() < 2 {
        None
    } else if scores.is_empty() {
        Some(0.0)
    } else {
        Some(scores.iter().sum::<f64>() / scores.len() as f64)
    };
    SentenceOverlap { value, sentences: sentences.len(), scored_pairs: scores.len() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_terminators_before_capitals() {
        assert_eq!(
            split_sentences("The snake slept. It woke! \"Why?\" Nobody knew. e.g. this"),
            vec!["The snake slept.", "It woke!", "\"Why?\"", "Nobody knew. e.g. this"]
        );
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize("Snake's"), "snake");
        assert_eq!(normalize("snakes"), "snake");
        assert_eq!(normalize("stories"), "story");
        assert_eq!(normalize("grass"), "grass");
        assert_eq!(normalize("its"), "its");
    }

    #[test]
    fn half_overlap() {
        let r = sentence_overlap("The snake slept. The snake ate.");
        assert_eq!(r.value, Some(0.5));
    }

    #[test]
    fn disjoint_and_identical() {
        assert_eq!(sentence_overlap("The snake slept. A bird sang.").value, Some(0.0));
        assert_eq!(sentence_overlap("The snake slept. The snake slept.").value, Some(1.0));
    }

    #[test]
    fn single_sentence_is_undefined() {
        let r = sentence_overlap("The snake slept");
        assert_eq!((r.value, r.sentences), (None, 1));
    }

    #[test]
    fn plural_and_possessive_match() {
        assert_eq!(sentence_overlap("The snake hid. Snakes hide.").value, Some(0.5));
        assert_eq!(sentence_overlap("A snake hid. The snake's eggs.").value, Some(0.5));
    }
}
