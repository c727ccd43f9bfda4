//! Character-trigram language identification using out-of-place rank
//! distance between frequency-ranked profiles.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{strip_noise, tokenize};
use crate::error::{Error, Result};

/// Number of ranked trigrams kept in a profile.
pub const PROFILE_SIZE: usize = 300;

/// Texts shorter than this (in characters) are never classified.
const MIN_CHARS: usize = 12;
const MIN_CONFIDENCE: f64 = 0.2;
const UNDETERMINED: &str = "und";

const BUILTIN_REFERENCE: &[(&str, &str)] = &[
    ("en", include_str!("../../data/langref/en.txt")),
    ("es", include_str!("../../data/langref/es.txt")),
    ("it", include_str!("../../data/langref/it.txt")),
    ("tl", include_str!("../../data/langref/tl.txt")),
];

/// A language tag with its most frequent character trigrams, most frequent
/// first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageProfile {
    pub tag: String,
    pub trigrams: Vec<String>,
    #[serde(skip)]
    ranks: HashMap<String, usize>,
}

fn ranked_trigrams(text: &str) -> Vec<String> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for word in tokenize(&strip_noise(text)) {
        if !word.chars().any(char::is_alphabetic) {
            continue;
        }
        let padded: Vec<char> = std::iter::once(' ')
            .chain(word.chars())
            .chain(std::iter::once(' '))
            .collect();
        for window in padded.windows(3) {
            *counts.entry(window.iter().collect()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(PROFILE_SIZE);
    ranked.into_iter().map(|(g, _)| g).collect()
}

impl LanguageProfile {
    pub fn new(tag: impl Into<String>, trigrams: Vec<String>) -> Result<Self> {
        let tag = tag.into();
        if trigrams.is_empty() {
            return Err(Error::Config(format!("language profile '{tag}' is empty")));
        }
        let mut ranks = HashMap::with_capacity(trigrams.len());
        for (rank, gram) in trigrams.iter().enumerate() {
            if ranks.insert(gram.clone(), rank).is_some() {
                return Err(Error::Config(format!(
                    "language profile '{tag}' repeats trigram {gram:?}"
                )));
            }
        }
        Ok(Self {
            tag,
            trigrams,
            ranks,
        })
    }

    /// Builds a profile from reference text.
    pub fn from_text(tag: impl Into<String>, text: &str) -> Result<Self> {
        Self::new(tag, ranked_trigrams(text))
    }

    /// Reads the JSON profile format `{tag, trigrams}`.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed: LanguageProfile = serde_json::from_str(&raw)?;
        Self::new(parsed.tag, parsed.trigrams)
    }

    fn rank(&self, gram: &str) -> Option<usize> {
        self.ranks.get(gram).copied()
    }
}

/// Profiles built from the bundled reference texts for en, es, it and tl.
pub fn builtin_profiles() -> Vec<LanguageProfile> {
    BUILTIN_REFERENCE
        .iter()
        .map(|(tag, text)| LanguageProfile::from_text(*tag, text).expect("reference text is non-empty"))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum LanguageGuess {
    Known { tag: String, confidence: f64 },
    Undetermined,
}

impl LanguageGuess {
    pub fn tag(&self) -> &str {
        match self {
            LanguageGuess::Known { tag, .. } => tag,
            LanguageGuess::Undetermined => UNDETERMINED,
        }
    }
}

/// Picks the profile with the smallest out-of-place distance to the text.
///
/// Confidence is `1 - dist / maxdist` where `maxdist` charges the full
/// penalty for every trigram of the text. Short or low-confidence texts come
/// back as [`LanguageGuess::Undetermined`].
pub fn identify_language(text: &str, profiles: &[LanguageProfile]) -> Result<LanguageGuess> {
    if profiles.is_empty() {
        return Err(Error::Config("no language profiles loaded".into()));
    }
    if text.trim().chars().count() < MIN_CHARS {
        return Ok(LanguageGuess::Undetermined);
    }
    let doc = ranked_trigrams(text);
    if doc.is_empty() {
        return Ok(LanguageGuess::Undetermined);
    }
    let max_dist = (doc.len() * PROFILE_SIZE) as f64;

    let mut best: Option<(usize, &LanguageProfile)> = None;
    for profile in profiles {
        let dist: usize = doc
            .iter()
            .enumerate()
            .map(|(rank, gram)| match profile.rank(gram) {
                Some(r) => rank.abs_diff(r).min(PROFILE_SIZE),
                None => PROFILE_SIZE,
            })
            .sum();
        // Strict comparison keeps the first profile on ties.
        if best.is_none_or(|(d, _)| dist < d) {
            best = Some((dist, profile));
        }
    }
    let (dist, profile) = best.expect("at least one profile");
    let confidence = 1.0 - dist as f64 / max_dist;
    if confidence < MIN_CONFIDENCE {
        return Ok(LanguageGuess::Undetermined);
    }
    Ok(LanguageGuess::Known {
        tag: profile.tag.clone(),
        confidence,
    })
}
