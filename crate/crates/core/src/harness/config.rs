use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::Manifest;
use crate::error::{Error, Result};
use crate::forest::ForestConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExpType {
    #[serde(rename = "SS")]
    SingleSource,
    #[serde(rename = "MS")]
    MultiSource,
    #[serde(rename = "MSWT")]
    MultiSourceWithTarget,
    #[serde(rename = "SC")]
    SpecialCase,
}

impl ExpType {
    pub fn code(self) -> &'static str {
        match self {
            ExpType::SingleSource => "SS",
            ExpType::MultiSource => "MS",
            ExpType::MultiSourceWithTarget => "MSWT",
            ExpType::SpecialCase => "SC",
        }
    }
}

impl fmt::Display for ExpType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Portion {
    /// Every message of the dataset.
    #[default]
    Full,
    /// Only the dataset's training split; valid for the target only.
    TrainSplit,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourcePortion {
    pub dataset: String,
    #[serde(default)]
    pub portion: Portion,
    #[serde(default)]
    pub language_filter: Option<String>,
}

impl SourcePortion {
    pub fn full(dataset: &str) -> Self {
        Self {
            dataset: dataset.into(),
            portion: Portion::Full,
            language_filter: None,
        }
    }

    pub fn train_split(dataset: &str) -> Self {
        Self {
            dataset: dataset.into(),
            portion: Portion::TrainSplit,
            language_filter: None,
        }
    }

    pub fn with_language(mut self, lang: &str) -> Self {
        self.language_filter = Some(lang.into());
        self
    }

    /// Name as it appears in reports, e.g. `ITEQ-EN`.
    pub fn display_name(&self) -> String {
        match &self.language_filter {
            Some(lang) => format!("{}-{}", self.dataset, lang.to_uppercase()),
            None => self.dataset.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub exp_type: ExpType,
    pub sources: Vec<SourcePortion>,
    pub target: String,
    #[serde(default)]
    pub notes: Option<String>,
}

impl ExperimentSpec {
    /// Checks the structural invariants that do not need the manifest.
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.name.trim().is_empty() {
            return Err("experiment name is empty".into());
        }
        if self.sources.is_empty() {
            return Err("no sources".into());
        }
        let mut seen = HashSet::new();
        for s in &self.sources {
            if !seen.insert(s.dataset.as_str()) {
                return Err(format!("dataset '{}' is listed more than once in sources", s.dataset));
            }
            let is_target = s.dataset == self.target;
            if is_target && s.portion == Portion::Full {
                return Err(format!(
                    "target '{}' appears as a full source; only its train_split may be used for training",
                    self.target
                ));
            }
            if !is_target && s.portion == Portion::TrainSplit {
                return Err(format!(
                    "source '{}' uses portion train_split, which is only valid for the target",
                    s.dataset
                ));
            }
        }
        let has_target = self.sources.iter().any(|s| s.dataset == self.target);
        let others = self.sources.iter().filter(|s| s.dataset != self.target).count();
        match self.exp_type {
            ExpType::SingleSource if self.sources.len() != 1 => {
                Err(format!("SS needs exactly 1 source, found {}", self.sources.len()))
            }
            ExpType::MultiSource if self.sources.len() < 2 => {
                Err(format!("MS needs at least 2 sources, found {}", self.sources.len()))
            }
            ExpType::MultiSource if has_target => Err("MS sources must not include the target".into()),
            ExpType::MultiSourceWithTarget if !has_target => {
                Err("MSWT must include the target's train_split as a source".into())
            }
            ExpType::MultiSourceWithTarget if others == 0 => {
                Err("MSWT needs at least one source besides the target".into())
            }
            _ => Ok(()),
        }
    }
}

fn default_test_fraction() -> f64 {
    0.3
}

fn default_feature_k() -> usize {
    1000
}

fn default_epsilon() -> f64 {
    0.005
}

fn default_validation_fraction() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateConfig {
    #[serde(default)]
    pub enabled: bool,
    /// Minimum weighted-AUC gain for accepting a candidate source.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Share of the target's train split held out for validation.
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            epsilon: default_epsilon(),
            validation_fraction: default_validation_fraction(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default = "default_feature_k")]
    pub feature_k: usize,
    /// `forest.seed` is ignored; every experiment derives its own seed from
    /// `master_seed` and its name.
    #[serde(default)]
    pub forest: ForestConfig,
    pub manifest_path: PathBuf,
    #[serde(default)]
    pub experiments: Vec<ExperimentSpec>,
    #[serde(default)]
    pub gate: GateConfig,
    /// Directory the config was read from; relative paths resolve here.
    #[serde(skip)]
    pub base_dir: PathBuf,
    #[serde(skip)]
    source_text: Option<String>,
}

impl ExperimentConfig {
    pub fn new(manifest_path: impl Into<PathBuf>, experiments: Vec<ExperimentSpec>) -> Self {
        Self {
            master_seed: 0,
            test_fraction: default_test_fraction(),
            feature_k: default_feature_k(),
            forest: ForestConfig::default(),
            manifest_path: manifest_path.into(),
            experiments,
            gate: GateConfig::default(),
            base_dir: PathBuf::new(),
            source_text: None,
        }
    }

    /// Parses a config. Schema violations become config errors carrying the
    /// line and column reported by the JSON parser.
    pub fn from_json(raw: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut config: ExperimentConfig =
            serde_json::from_str(raw).map_err(|e| Error::Config(format!("experiment config: {e}")))?;
        config.base_dir = base_dir.into();
        config.source_text = Some(raw.to_string());
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&raw, base)
    }

    pub fn manifest_file(&self) -> PathBuf {
        if self.manifest_path.is_absolute() {
            self.manifest_path.clone()
        } else {
            self.base_dir.join(&self.manifest_path)
        }
    }

    /// Line of the `"name": "<name>"` entry in the original config text.
    fn line_of(&self, name: &str) -> Option<usize> {
        let raw = self.source_text.as_deref()?;
        let pattern = Regex::new(&format!(r#""name"\s*:\s*"{}""#, regex::escape(name))).ok()?;
        let offset = pattern.find(raw)?.start();
        Some(raw[..offset].matches('\n').count() + 1)
    }

    fn experiment_error(&self, spec: &ExperimentSpec, message: &str) -> Error {
        let location = self.line_of(&spec.name).map(|l| format!(" (line {l})")).unwrap_or_default();
        Error::Config(format!(
            "experiment '{}'{location} violates the ExperimentSpec invariant: {message}",
            spec.name
        ))
    }

    /// Validates parameters and every experiment against the manifest.
    /// Returns chronology warnings (sources dated after their target).
    pub fn validate(&self, manifest: &Manifest) -> Result<Vec<String>> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!("test_fraction must lie in (0, 1), got {}", self.test_fraction)));
        }
        if self.feature_k < 1 {
            return Err(Error::Config("feature_k must be at least 1".into()));
        }
        self.forest.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.gate.validation_fraction > 0.0 && self.gate.validation_fraction < 1.0) {
            return Err(Error::Config("gate.validation_fraction must lie in (0, 1)".into()));
        }
        if self.gate.epsilon.is_nan() || self.gate.epsilon < 0.0 {
            return Err(Error::Config("gate.epsilon must be non-negative".into()));
        }

        let mut warnings = Vec::new();
        let mut names = HashSet::new();
        for spec in &self.experiments {
            if !names.insert(spec.name.as_str()) {
                return Err(self.experiment_error(spec, "experiment names must be unique"));
            }
            spec.check().map_err(|m| self.experiment_error(spec, &m))?;
            let target = manifest
                .entry(&spec.target)
                .ok_or_else(|| self.experiment_error(spec, &format!("unknown target dataset '{}'", spec.target)))?;
            for source in &spec.sources {
                let meta = manifest.entry(&source.dataset).ok_or_else(|| {
                    self.experiment_error(spec, &format!("unknown source dataset '{}'", source.dataset))
                })?;
                if meta.date > target.date {
                    warnings.push(format!(
                        "experiment '{}': source {} ({}) is dated after target {} ({})",
                        spec.name, meta.short_name, meta.date, target.short_name, target.date
                    ));
                }
            }
        }
        Ok(warnings)
    }
}
