//! Identifier-aware tokenization shared by keyword extraction, topic
//! candidates and lexical retrieval.
//!
//! Source text is split on every non-alphanumeric character, then each chunk
//! is split at camelCase boundaries (`SalePrice` -> `sale`, `price`;
//! `HTMLParser` -> `html`, `parser`) and lowercased. Single characters, pure
//! numbers, Python keywords and the stopword list below are dropped.
//!
//! The stopword list is part of the crate's observable behaviour: golden
//! keyword and retrieval tests depend on it, so edits are breaking changes.

use std::collections::HashSet;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};

/// Version tag of [`STOPWORDS`]; bump on any change.
pub const STOPWORDS_VERSION: u32 = 1;

pub const STOPWORDS: &[&str] = &[
    // python keywords and ubiquitous builtins
    "and", "as", "assert", "async", "await", "break", "class", "continue", "def", "del", "elif",
    "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda",
    "nonlocal", "not", "or", "pass", "raise", "return", "try", "while", "with", "yield", "none",
    "true", "false", "self", "print", "len", "range", "list", "dict", "str", "int", "float",
    "tuple", "set", "type", "object",
    // conventional import aliases and throwaway names
    "pd", "np", "plt", "sns", "df", "tmp",
    // english
    "a", "an", "the", "of", "to", "on", "at", "by", "into", "onto", "over", "under", "about",
    "this", "that", "these", "those", "it", "its", "are", "was", "were", "be", "been", "being",
    "but", "then", "than", "so", "we", "our", "you", "your", "my", "me", "he", "she", "they",
    "them", "their", "his", "her", "what", "which", "who", "whom", "when", "where", "why", "how",
    "all", "any", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "only",
    "own", "same", "too", "very", "can", "will", "just", "do", "does", "did", "doing", "have",
    "has", "had", "having", "should", "would", "could", "there", "here", "up", "down", "out",
    "off", "again", "further", "once", "both", "between", "through", "during", "before",
    "after", "above", "below", "also", "via", "using", "use",
];

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS.iter().copied().collect())
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

/// Splits one alphanumeric chunk at camelCase and letter/digit boundaries.
fn split_camel(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut start = 0;
    for i in 1..chars.len() {
        let prev = chars[i - 1];
        let cur = chars[i];
        let next = chars.get(i + 1).copied();
        let boundary = (prev.is_lowercase() && cur.is_uppercase())
            || (prev.is_uppercase()
                && cur.is_uppercase()
                && next.is_some_and(|n| n.is_lowercase()))
            || (prev.is_alphabetic() && cur.is_ascii_digit())
            || (prev.is_ascii_digit() && cur.is_alphabetic());
        if boundary {
            out.push(chars[start..i].iter().collect());
            start = i;
        }
    }
    if start < chars.len() {
        out.push(chars[start..].iter().collect());
    }
}

/// Splits text into raw identifier parts, preserving case.
pub fn identifier_parts(text: &str) -> Vec<String> {
    let mut parts = Vec::new();
    for chunk in text.split(|c: char| !c.is_alphanumeric()) {
        if !chunk.is_empty() {
            split_camel(chunk, &mut parts);
        }
    }
    parts
}

/// Lowercased display tokens with stopwords, numbers and one-character
/// fragments removed. Used for keywords.
pub fn tokens(text: &str) -> Vec<String> {
    identifier_parts(text)
        .into_iter()
        .map(|p| p.to_lowercase())
        .filter(|t| t.chars().count() > 1)
        .filter(|t| !t.chars().all(|c| c.is_ascii_digit()))
        .filter(|t| !is_stopword(t))
        .collect()
}

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

pub fn stem(token: &str) -> String {
    stemmer().stem(token).into_owned()
}

/// Stemmed index terms, the vocabulary of lexical retrieval.
pub fn index_terms(text: &str) -> Vec<String> {
    tokens(text).iter().map(|t| stem(t)).collect()
}

/// `read csv` -> `Read Csv`.
pub fn title_case(text: &str) -> String {
    text.split_whitespace()
        .map(|w| {
            let mut chars = w.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect::<String>(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}
