//! Synthetic labeled events for exercising the harness.
//!
//! A [`Language`] holds one signal lexicon per class. An event draws each
//! token either from its own class-independent noise vocabulary, from the
//! language's class lexicons or from event-specific class lexicons. Signal
//! tokens come from the document's own class with probability `purity` and
//! from a uniformly chosen class otherwise.

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{Dataset, Message};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_classes: usize,
    /// Words per class lexicon of a language.
    pub signal_words: usize,
    /// Words per event-specific class lexicon.
    pub event_words: usize,
    /// Share of signal tokens taken from the event-specific lexicons.
    pub event_share: f64,
    /// Share of tokens drawn from the event's noise vocabulary.
    pub noise_fraction: f64,
    pub noise_words: usize,
    pub purity: f64,
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_classes: 6,
            signal_words: 40,
            event_words: 20,
            event_share: 0.4,
            noise_fraction: 0.3,
            noise_words: 300,
            purity: 0.6,
            min_len: 5,
            max_len: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Language {
    pub tag: String,
    pub lexicons: Vec<Vec<String>>,
}

impl Language {
    pub fn new(tag: &str, spec: &SynthSpec) -> Self {
        let lexicons = (0..spec.n_classes)
            .map(|c| (0..spec.signal_words).map(|j| format!("{tag}s{c}w{j}")).collect())
            .collect();
        Self {
            tag: tag.to_string(),
            lexicons,
        }
    }

    /// A language keeping a seeded `shared` fraction of each class lexicon
    /// and replacing the rest with fresh words.
    pub fn derive(&self, tag: &str, shared: f64, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let lexicons = self
            .lexicons
            .iter()
            .enumerate()
            .map(|(c, words)| {
                let keep = (shared * words.len() as f64).round() as usize;
                let mut order: Vec<usize> = (0..words.len()).collect();
                order.shuffle(&mut rng);
                let mut out = words.clone();
                for (n, &j) in order.iter().enumerate().skip(keep) {
                    out[j] = format!("{tag}s{c}w{n}");
                }
                out
            })
            .collect();
        Self {
            tag: tag.to_string(),
            lexicons,
        }
    }

    /// Words shared with `other`, over all classes.
    pub fn shared_fraction(&self, other: &Language) -> f64 {
        let (mut shared, mut total) = (0, 0);
        for (a, b) in self.lexicons.iter().zip(&other.lexicons) {
            total += a.len();
            shared += a.iter().filter(|w| b.contains(w)).count();
        }
        shared as f64 / total.max(1) as f64
    }
}

fn dataset(name: &str, day: u32, lang: &str, messages: Vec<Message>) -> Dataset {
    Dataset {
        short_name: name.to_string(),
        event_type: "synthetic".into(),
        date: NaiveDate::from_ymd_opt(2012, 1, 1).unwrap() + chrono::Days::new(day as u64),
        default_lang: Some(lang.to_string()),
        messages,
        expected_count: None,
    }
}

/// `n_docs` messages of one event, labels cycling through the classes.
/// `day` offsets the event date so events order chronologically.
pub fn generate_event(name: &str, day: u32, language: &Language, spec: &SynthSpec, n_docs: usize, seed: u64) -> Dataset {
    generate_sibling(name, name, day, language, spec, n_docs, seed)
}

/// Like [`generate_event`], but with the event-specific and noise
/// vocabularies of event `like`: a fresh sample of the same distribution.
pub fn generate_sibling(
    name: &str,
    like: &str,
    day: u32,
    language: &Language,
    spec: &SynthSpec,
    n_docs: usize,
    seed: u64,
) -> Dataset {
    let mut rng = seed::rng(seed::named(seed, name));
    let stem = like.to_lowercase();
    let event_lexicons: Vec<Vec<String>> = (0..spec.n_classes)
        .map(|c| (0..spec.event_words).map(|j| format!("{stem}e{c}w{j}")).collect())
        .collect();
    let noise: Vec<String> = (0..spec.noise_words).map(|j| format!("{stem}n{j}")).collect();
    let messages = (0..n_docs)
        .map(|i| {
            let label = i % spec.n_classes;
            let len = rng.gen_range(spec.min_len..=spec.max_len);
            let words: Vec<&str> = (0..len)
                .map(|_| {
                    if rng.gen_bool(spec.noise_fraction) {
                        return noise.choose(&mut rng).unwrap().as_str();
                    }
                    let class = if rng.gen_bool(spec.purity) {
                        label
                    } else {
                        rng.gen_range(0..spec.n_classes)
                    };
                    let pool = if spec.event_words > 0 && rng.gen_bool(spec.event_share) {
                        &event_lexicons[class]
                    } else {
                        &language.lexicons[class]
                    };
                    pool.choose(&mut rng).unwrap().as_str()
                })
                .collect();
            Message {
                id: format!("{name}-{i}"),
                text: words.join(" "),
                label,
                lang: Some(language.tag.clone()),
            }
        })
        .collect();
    dataset(name, day, &language.tag, messages)
}

/// Random tokens with random labels.
pub fn noise_event(name: &str, day: u32, n_classes: usize, vocab: usize, n_docs: usize, seed: u64) -> Dataset {
    let mut rng = seed::rng(seed::named(seed, name));
    let messages = (0..n_docs)
        .map(|i| {
            let len = rng.gen_range(5..=12);
            let words: Vec<String> = (0..len)
                .map(|_| format!("{}r{}", name.to_lowercase(), rng.gen_range(0..vocab)))
                .collect();
            Message {
                id: format!("{name}-{i}"),
                text: words.join(" "),
                label: rng.gen_range(0..n_classes),
                lang: Some("xx".into()),
            }
        })
        .collect();
    dataset(name, day, "xx", messages)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_keeps_requested_share() {
        let spec = SynthSpec::default();
        let base = Language::new("aa", &spec);
        let near = base.derive("bb", 0.82, 1);
        let far = base.derive("cc", 0.10, 1);
        assert!((base.shared_fraction(&near) - 0.825).abs() < 1e-12);
        assert!((base.shared_fraction(&far) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn events_are_deterministic_and_balanced() {
        let spec = SynthSpec::default();
        let lang = Language::new("aa", &spec);
        let a = generate_event("EVA", 0, &lang, &spec, 60, 7);
        assert_eq!(a, generate_event("EVA", 0, &lang, &spec, 60, 7));
        assert_ne!(a, generate_event("EVA", 0, &lang, &spec, 60, 8));
        assert_eq!(a.label_counts(6), vec![10; 6]);
        assert!(a.messages.iter().all(|m| !m.text.is_empty()));
        let n = noise_event("NZ", 3, 6, 500, 40, 7);
        assert_eq!(n.len(), 40);
        assert!(n.date > a.date);
    }
}
