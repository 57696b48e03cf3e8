//! Word-limit rules shared by every text source.

/// Fixed closing clause every story ends on.
pub const ENDING_SUFFIX: &str = ", and the story of the snake ends";

/// Words the suffix adds once glued to the preceding word ("home," counts once).
pub const ENDING_SUFFIX_WORDS: usize = 7;

const FALLBACK_ENDING_BODY: &str = "The snake curled up to rest at last";

/// Whitespace-delimited word count.
pub fn count_words(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Longest prefix of `text` holding at most `limit` words, cut right after the
/// last kept word. Inner whitespace (including newlines) is preserved.
pub fn truncate_words(text: &str, limit: usize) -> &str {
    if limit == 0 {
        return "";
    }
    let mut words = 0;
    let mut in_word = false;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if in_word {
                words += 1;
                in_word = false;
                if words == limit {
                    return &text[..i];
                }
            }
        } else {
            in_word = true;
        }
    }
    text.trim_end()
}

/// Cuts an option text to the word limit and drops trailing whitespace.
pub fn enforce_option(raw: &str, limit: usize) -> String {
    truncate_words(raw.trim_end(), limit).to_string()
}

/// Makes `raw` a valid ending: at most `limit` words, finishing with
/// [`ENDING_SUFFIX`]. The suffix is appended when the text lacks it, after
/// trimming the text to leave room for it.
pub fn enforce_ending(raw: &str, limit: usize) -> String {
    let body = truncate_words(raw.trim(), limit);
    let closed = body.trim_end_matches(['.', '!', '?', ' ', '\n', '\r', '\t']);
    if closed.ends_with(ENDING_SUFFIX) && count_words(closed) > ENDING_SUFFIX_WORDS {
        return closed.to_string();
    }
    let room = limit.saturating_sub(ENDING_SUFFIX_WORDS).max(1);
    let head = truncate_words(body, room)
        .trim_end_matches(|c: char| c.is_whitespace() || c.is_ascii_punctuation());
    let head = if head.is_empty() { FALLBACK_ENDING_BODY } else { head };
    format!("{head}{ENDING_SUFFIX}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffix_word_count_matches_constant() {
        let glued = format!("home{ENDING_SUFFIX}");
        assert_eq!(count_words(&glued) - 1, ENDING_SUFFIX_WORDS);
    }

    #[test]
    fn truncation_keeps_inner_layout() {
        assert_eq!(truncate_words("one two\n\nthree four", 3), "one two\n\nthree");
        assert_eq!(truncate_words("  one two", 1), "  one");
        assert_eq!(truncate_words("one two ", 5), "one two");
        assert_eq!(truncate_words("one", 0), "");
    }

    #[test]
    fn ending_is_appended_when_missing() {
        let ending = enforce_ending("It slithered home.", 80);
        assert_eq!(ending, "It slithered home, and the story of the snake ends");
    }

    #[test]
    fn ending_already_present_is_kept() {
        let ending = enforce_ending("It slept, and the story of the snake ends.", 80);
        assert_eq!(ending, "It slept, and the story of the snake ends");
    }

    #[test]
    fn long_ending_truncated_before_suffix() {
        let raw = vec!["word"; 120].join(" ");
        let ending = enforce_ending(&raw, 80);
        assert_eq!(count_words(&ending), 80);
        assert!(ending.ends_with(ENDING_SUFFIX));
        assert!(ending.starts_with("word word"));
    }

    #[test]
    fn empty_ending_gets_fallback_body() {
        let ending = enforce_ending("   ", 80);
        assert!(ending.ends_with(ENDING_SUFFIX));
        assert!(count_words(&ending) <= 80);
    }
}
