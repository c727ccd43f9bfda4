use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const BUILTIN: &[(&str, &str)] = &[
    ("en", include_str!("../../data/stopwords/en.txt")),
    ("es", include_str!("../../data/stopwords/es.txt")),
    ("it", include_str!("../../data/stopwords/it.txt")),
    ("tl", include_str!("../../data/stopwords/tl.txt")),
];

/// Stopword sets keyed by language tag.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopwordTable {
    lists: BTreeMap<String, BTreeSet<String>>,
}

/// Parses the stopword file format: one word per line, `#` comments.
fn parse_list(contents: &str) -> BTreeSet<String> {
    contents
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

impl StopwordTable {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The bundled lists for en, es, it and tl.
    pub fn builtin() -> Self {
        let mut table = Self::empty();
        for (tag, contents) in BUILTIN {
            table.insert(tag, parse_list(contents));
        }
        table
    }

    /// Built-in lists, with any `<tag>.txt` file in `dir` replacing the list
    /// for that tag (or adding a new language).
    pub fn with_overrides(dir: &Path) -> Result<Self> {
        let mut table = Self::builtin();
        let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
            .collect();
        paths.sort();
        for path in paths {
            let Some(tag) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let contents = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            table.insert(&tag.to_lowercase(), parse_list(&contents));
        }
        Ok(table)
    }

    pub fn insert(&mut self, tag: &str, words: BTreeSet<String>) {
        self.lists.insert(tag.to_string(), words);
    }

    pub fn contains(&self, tag: &str, word: &str) -> bool {
        self.lists.get(tag).is_some_and(|set| set.contains(word))
    }

    /// Words for `tag`; empty for unknown tags.
    pub fn words(&self, tag: &str) -> impl Iterator<Item = &str> {
        self.lists.get(tag).into_iter().flatten().map(String::as_str)
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.lists.keys().map(String::as_str)
    }
}
