use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::Taxonomy;
use crate::error::{Error, Result};

/// One dataset entry of a manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub short_name: String,
    pub path: PathBuf,
    pub event_type: String,
    pub date: NaiveDate,
    #[serde(default)]
    pub default_lang: Option<String>,
    #[serde(default)]
    pub expected_count: Option<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ManifestFile {
    Entries(Vec<DatasetMeta>),
    WithLabels {
        #[serde(default)]
        labels: Option<Taxonomy>,
        datasets: Vec<DatasetMeta>,
    },
}

/// Dataset metadata plus the label taxonomy.
///
/// Accepts either a bare JSON array of entries or an object
/// `{"labels": [...], "datasets": [...]}` overriding the default taxonomy.
#[derive(Debug, Clone)]
pub struct Manifest {
    pub taxonomy: Taxonomy,
    pub entries: Vec<DatasetMeta>,
    /// Relative dataset paths resolve against this directory.
    pub base_dir: PathBuf,
}

impl Manifest {
    pub fn from_json(raw: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let parsed: ManifestFile = match serde_json::from_str(raw) {
            Ok(parsed) => parsed,
            // The untagged error hides the cause; parse strictly to find it.
            Err(e) => {
                let detail = serde_json::from_str::<Vec<DatasetMeta>>(raw)
                    .err()
                    .filter(|_| raw.trim_start().starts_with('['))
                    .unwrap_or(e);
                return Err(Error::Config(format!("manifest: {detail}")));
            }
        };
        let (taxonomy, entries) = match parsed {
            ManifestFile::Entries(entries) => (Taxonomy::default(), entries),
            ManifestFile::WithLabels { labels, datasets } => (labels.unwrap_or_default(), datasets),
        };
        let mut names = HashSet::new();
        for entry in &entries {
            if entry.short_name.trim().is_empty() {
                return Err(Error::Config("manifest: empty short_name".into()));
            }
            if !names.insert(entry.short_name.as_str()) {
                return Err(Error::Config(format!(
                    "manifest: duplicate short_name '{}'",
                    entry.short_name
                )));
            }
        }
        Ok(Self {
            taxonomy,
            entries,
            base_dir: base_dir.into(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&raw, base)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn entry(&self, short_name: &str) -> Option<&DatasetMeta> {
        self.entries.iter().find(|e| e.short_name == short_name)
    }
}
