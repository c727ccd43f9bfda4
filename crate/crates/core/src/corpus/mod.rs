//! Labeled event datasets: taxonomy, manifest, CSV loading, stratified splits,
//! chronological ordering, language filtering and lexical overlap.
//!
//! Datasets are immutable once loaded and can be shared across threads.

mod manifest;
mod split;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{identify_language, LanguageProfile, Preprocessor};

pub use manifest::{DatasetMeta, Manifest};
pub use split::{make_split, DatasetSplit};

/// Default information-type categories.
pub const DEFAULT_LABELS: [&str; 6] = [
    "affected_individuals",
    "infrastructure_utilities",
    "donations_volunteering",
    "caution_advice",
    "sympathy_support",
    "other_useful",
];

/// Longer spellings of the default categories as they appear in public
/// crisis annotation releases.
const DEFAULT_ALIASES: &[(&str, &str)] = &[
    ("infrastructure_and_utilities", "infrastructure_utilities"),
    ("donations_and_volunteering", "donations_volunteering"),
    ("caution_and_advice", "caution_advice"),
    ("sympathy_and_support", "sympathy_support"),
    ("sympathy_and_emotional_support", "sympathy_support"),
    ("other_useful_information", "other_useful"),
];

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CategoryLabel {
    pub id: usize,
    pub name: String,
}

/// Ordered label names; a label's id is its position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Taxonomy {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

/// Lowercases and joins words with `_` so "Caution and advice" and
/// "caution_and_advice" compare equal.
fn normalize_label(raw: &str) -> String {
    raw.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join("_")
}

impl Taxonomy {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(Error::Config("a taxonomy needs at least two labels".into()));
        }
        let mut index = HashMap::new();
        for (id, name) in names.iter().enumerate() {
            let key = normalize_label(name);
            if key.is_empty() {
                return Err(Error::Config(format!("label {id} has an empty name")));
            }
            if index.insert(key, id).is_some() {
                return Err(Error::Config(format!("duplicate label '{name}'")));
            }
        }
        Ok(Self { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn label(&self, id: usize) -> CategoryLabel {
        CategoryLabel {
            id,
            name: self.names[id].clone(),
        }
    }

    /// Resolves a raw label string (case and separator insensitive).
    pub fn id_of(&self, raw: &str) -> Option<usize> {
        let key = normalize_label(raw);
        if let Some(&id) = self.index.get(&key) {
            return Some(id);
        }
        if self.is_default() {
            let (_, canonical) = DEFAULT_ALIASES.iter().find(|(alias, _)| *alias == key)?;
            return self.index.get(*canonical).copied();
        }
        None
    }

    fn is_default(&self) -> bool {
        self.names.iter().map(String::as_str).eq(DEFAULT_LABELS)
    }
}

impl Default for Taxonomy {
    fn default() -> Self {
        Self::new(DEFAULT_LABELS).expect("default taxonomy is valid")
    }
}

impl TryFrom<Vec<String>> for Taxonomy {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        Self::new(names)
    }
}

impl From<Taxonomy> for Vec<String> {
    fn from(t: Taxonomy) -> Self {
        t.names
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: String,
    pub text: String,
    /// Taxonomy id.
    pub label: usize,
    /// Resolved language: the row's own tag, else the dataset default.
    pub lang: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub short_name: String,
    pub event_type: String,
    pub date: NaiveDate,
    pub default_lang: Option<String>,
    pub messages: Vec<Message>,
    pub expected_count: Option<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Every language tag present on the dataset's messages or as its
    /// default, sorted. These select the stopword lists for its texts.
    pub fn languages(&self) -> Vec<String> {
        let mut langs: BTreeSet<String> = self.messages.iter().filter_map(|m| m.lang.clone()).collect();
        langs.extend(self.default_lang.clone());
        langs.into_iter().collect()
    }

    /// Number of messages per label id.
    pub fn label_counts(&self, n_labels: usize) -> Vec<usize> {
        let mut counts = vec![0; n_labels];
        for m in &self.messages {
            counts[m.label] += 1;
        }
        counts
    }

    fn header(&self) -> Self {
        Self {
            short_name: self.short_name.clone(),
            event_type: self.event_type.clone(),
            date: self.date,
            default_lang: self.default_lang.clone(),
            messages: Vec::new(),
            expected_count: None,
        }
    }

    /// A copy restricted to messages whose id passes `keep`.
    pub fn retain_ids(&self, keep: impl Fn(&str) -> bool) -> Self {
        let mut out = self.header();
        out.messages = self.messages.iter().filter(|m| keep(&m.id)).cloned().collect();
        out
    }
}

fn normalize_lang(raw: &str) -> Option<String> {
    let tag = raw.trim().to_lowercase();
    (!tag.is_empty()).then_some(tag)
}

/// Reads a dataset CSV with header `id,text,label[,lang]`.
///
/// Row numbers in errors are file line numbers (the header is line 1).
pub fn load_dataset(path: &Path, meta: &DatasetMeta, taxonomy: &Taxonomy) -> Result<Dataset> {
    let shown = path.display();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::load(&shown, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::load(&shown, e.to_string()))?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let (Some(id_col), Some(text_col), Some(label_col)) = (column("id"), column("text"), column("label")) else {
        return Err(Error::load(&shown, "header must contain id,text,label columns"));
    };
    let lang_col = column("lang");
    let default_lang = meta.default_lang.as_deref().and_then(normalize_lang);

    let mut messages = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::load(&shown, e.to_string()))?;
        let row = record.position().map_or(0, |p| p.line());
        let field = |col: usize| record.get(col).unwrap_or("").trim();

        let id = field(id_col);
        if id.is_empty() {
            return Err(Error::load(&shown, format!("row {row}: empty id")));
        }
        let text = field(text_col);
        if text.is_empty() {
            return Err(Error::load(&shown, format!("row {row}: empty text")));
        }
        let raw_label = field(label_col);
        if raw_label.is_empty() {
            return Err(Error::load(&shown, format!("row {row}: missing label")));
        }
        let label = taxonomy
            .id_of(raw_label)
            .ok_or_else(|| Error::load(&shown, format!("row {row}: unknown label '{raw_label}'")))?;
        if !seen.insert(id.to_string()) {
            return Err(Error::load(&shown, format!("row {row}: duplicate message id '{id}'")));
        }
        let lang = lang_col
            .and_then(|c| normalize_lang(field(c)))
            .or_else(|| default_lang.clone());
        messages.push(Message {
            id: id.to_string(),
            text: text.to_string(),
            label,
            lang,
        });
    }

    if let Some(expected) = meta.expected_count {
        if messages.len() != expected {
            return Err(Error::load(
                &shown,
                format!(
                    "{} declares {expected} messages but the file has {}",
                    meta.short_name,
                    messages.len()
                ),
            ));
        }
    }

    Ok(Dataset {
        short_name: meta.short_name.clone(),
        event_type: meta.event_type.clone(),
        date: meta.date,
        default_lang,
        messages,
        expected_count: meta.expected_count,
    })
}

/// Sorts by date; datasets on the same date keep their input order.
/// Writes `id,text,label,lang` rows readable by [`load_dataset`].
pub fn write_dataset<W: std::io::Write>(ds: &Dataset, taxonomy: &Taxonomy, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["id", "text", "label", "lang"])?;
    for m in &ds.messages {
        writer.write_record([
            m.id.as_str(),
            m.text.as_str(),
            taxonomy.name(m.label),
            m.lang.as_deref().unwrap_or(""),
        ])?;
    }
    writer.flush().map_err(|e| Error::io(ds.short_name.as_str(), e))?;
    Ok(())
}

pub fn order_chronologically(mut datasets: Vec<Dataset>) -> Vec<Dataset> {
    datasets.sort_by_key(|d| d.date);
    datasets
}

/// Messages tagged `lang`, as a new dataset named `<short_name>-<LANG>`.
pub fn filter_language(ds: &Dataset, lang: &str) -> Result<Dataset> {
    let lang = lang.trim().to_lowercase();
    if let Some(m) = ds.messages.iter().find(|m| m.lang.is_none()) {
        return Err(Error::Data(format!(
            "{}: message '{}' has no language tag; run tag_languages or set default_lang in the manifest",
            ds.short_name, m.id
        )));
    }
    let suffix = format!("-{}", lang.to_uppercase());
    let short_name = if ds.short_name.ends_with(&suffix) {
        ds.short_name.clone()
    } else {
        format!("{}{suffix}", ds.short_name)
    };
    let mut out = ds.header();
    out.short_name = short_name;
    out.default_lang = Some(lang.clone());
    out.messages = ds
        .messages
        .iter()
        .filter(|m| m.lang.as_deref() == Some(lang.as_str()))
        .cloned()
        .collect();
    Ok(out)
}

/// Fills missing language tags with the best-matching profile, or `und`.
pub fn tag_languages(ds: &Dataset, profiles: &[LanguageProfile]) -> Result<Dataset> {
    let mut out = ds.clone();
    for m in out.messages.iter_mut().filter(|m| m.lang.is_none()) {
        m.lang = Some(identify_language(&m.text, profiles)?.tag().to_string());
    }
    Ok(out)
}

/// Jaccard coefficient of the two datasets' preprocessed unigram sets.
pub fn lexical_overlap(a: &Dataset, b: &Dataset, pre: &Preprocessor) -> Result<f64> {
    let vocab = |ds: &Dataset| -> Result<BTreeSet<String>> {
        let langs = ds.languages();
        let set = pre.unigram_set(ds.messages.iter().map(|m| m.text.as_str()), &langs);
        if set.is_empty() {
            return Err(Error::Data(format!(
                "{} has an empty vocabulary after preprocessing",
                ds.short_name
            )));
        }
        Ok(set)
    };
    let (va, vb) = (vocab(a)?, vocab(b)?);
    let shared = va.intersection(&vb).count();
    let union = va.len() + vb.len() - shared;
    Ok(shared as f64 / union as f64)
}

/// All datasets of a manifest, loaded and validated.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub taxonomy: Taxonomy,
    datasets: Vec<Dataset>,
    index: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(taxonomy: Taxonomy, datasets: Vec<Dataset>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, ds) in datasets.iter().enumerate() {
            if index.insert(ds.short_name.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate dataset '{}'", ds.short_name)));
            }
            if let Some(m) = ds.messages.iter().find(|m| m.label >= taxonomy.len()) {
                return Err(Error::Data(format!(
                    "{}: message '{}' has label id {} outside the taxonomy",
                    ds.short_name, m.id, m.label
                )));
            }
        }
        Ok(Self {
            taxonomy,
            datasets,
            index,
        })
    }

    pub fn load(manifest: &Manifest) -> Result<Self> {
        let datasets = manifest
            .entries
            .iter()
            .map(|meta| load_dataset(&manifest.resolve(&meta.path), meta, &manifest.taxonomy))
            .collect::<Result<Vec<_>>>()?;
        Self::new(manifest.taxonomy.clone(), datasets)
    }

    pub fn get(&self, name: &str) -> Option<&Dataset> {
        self.index.get(name).map(|&i| &self.datasets[i])
    }

    pub fn datasets(&self) -> &[Dataset] {
        &self.datasets
    }
}
