use std::collections::HashSet;
use std::sync::LazyLock;

const STOP_WORDS_FILE: &str = include_str!("../../data/stopwords_en_v1.txt");

/// Version tag of the shipped stop-word list.
pub const STOP_WORDS_VERSION: &str = "en-v1";

// Entries go through the same character filter as the text, so "don't"
// matches the token "dont".
static STOP_WORDS: LazyLock<HashSet<String>> = LazyLock::new(|| {
    STOP_WORDS_FILE
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|w| strip_non_alphanumeric(&w.to_lowercase()))
        .collect()
});

/// The normalized stop-word set used by [`preprocess`].
pub fn stop_words() -> &'static HashSet<String> {
    &STOP_WORDS
}

fn strip_non_alphanumeric(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric() || c.is_whitespace()).collect()
}

/// Lowercases, removes non-alphanumeric characters, splits on whitespace and
/// drops tokens shorter than three characters and English stop words.
pub fn preprocess(text: &str) -> Vec<String> {
    let cleaned = strip_non_alphanumeric(&text.to_lowercase());
    cleaned
        .split_whitespace()
        .filter(|t| t.chars().count() >= 3)
        .filter(|t| !STOP_WORDS.contains(*t))
        .map(str::to_owned)
        .collect()
}
