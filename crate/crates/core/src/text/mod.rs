//! Text normalization: noise stripping, tokenization, stopword removal and
//! language identification.
//!
//! Every function here is pure. The same input text always yields the same
//! token list.

mod langid;
mod stopwords;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use unicode_normalization::UnicodeNormalization;

pub use langid::{builtin_profiles, identify_language, LanguageGuess, LanguageProfile, PROFILE_SIZE};
pub use stopwords::StopwordTable;

/// Ordered lowercase tokens of one message.
pub type TokenList = Vec<String>;

fn noise_pattern() -> &'static Regex {
    static PATTERN: OnceLock<Regex> = OnceLock::new();
    PATTERN.get_or_init(|| {
        Regex::new(r"(?:https?://|www\.)\S*|@\w+").expect("noise pattern compiles")
    })
}

/// Removes URLs and user mentions, collapses whitespace and trims.
///
/// Matches are replaced by a space before whitespace is collapsed, so removing
/// one match can never splice its neighbours into a new match.
pub fn strip_noise(text: &str) -> String {
    let pattern = noise_pattern();
    let mut current = text.to_string();
    // Every replacement shortens the string, so this terminates.
    while pattern.is_match(&current) {
        current = pattern.replace_all(&current, " ").into_owned();
    }
    current.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// True if `text` still contains a URL or mention.
pub fn contains_noise(text: &str) -> bool {
    noise_pattern().is_match(text)
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '\u{2019}'
}

/// Splits noise-stripped text into lowercase tokens.
///
/// Text is NFKC-normalized and lowercased. Tokens are maximal runs of
/// letters, digits and apostrophes; `#` is deleted so hashtags read as plain
/// words, every other character delimits.
pub fn tokenize(text: &str) -> TokenList {
    let normalized: String = text.nfkc().collect::<String>().to_lowercase();
    // Lowercasing can produce sequences that are not NFKC-stable.
    let normalized: String = normalized.nfkc().filter(|&c| c != '#').collect();
    normalized
        .split(|c: char| !is_token_char(c))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Drops tokens found in the union of the stoplists for `langs`.
pub fn remove_stopwords<S: AsRef<str>>(
    tokens: &[String],
    langs: &[S],
    table: &StopwordTable,
) -> TokenList {
    tokens
        .iter()
        .filter(|t| !langs.iter().any(|l| table.contains(l.as_ref(), t)))
        .cloned()
        .collect()
}

/// The full per-message preprocessing chain used for training and
/// classification alike.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    stopwords: StopwordTable,
}

impl Preprocessor {
    pub fn new(stopwords: StopwordTable) -> Self {
        Self { stopwords }
    }

    pub fn stopwords(&self) -> &StopwordTable {
        &self.stopwords
    }

    /// strip_noise, tokenize, then remove stopwords of the given languages.
    pub fn process<S: AsRef<str>>(&self, text: &str, langs: &[S]) -> TokenList {
        let tokens = tokenize(&strip_noise(text));
        remove_stopwords(&tokens, langs, &self.stopwords)
    }

    /// Set of unigrams over a collection of texts.
    pub fn unigram_set<'a, S: AsRef<str>>(
        &self,
        texts: impl IntoIterator<Item = &'a str>,
        langs: &[S],
    ) -> BTreeSet<String> {
        texts
            .into_iter()
            .flat_map(|t| self.process(t, langs))
            .collect()
    }
}

impl Default for Preprocessor {
    fn default() -> Self {
        Self::new(StopwordTable::builtin())
    }
}
