//! Self-describing model files: everything needed to classify raw text.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Taxonomy;
use crate::error::{Error, Result};
use crate::features::{vectorize, FeatureVector, SelectedFeatures, Vocabulary};
use crate::forest::{argmax, ForestConfig, RandomForest, Shape, TreeNode};
use crate::text::Preprocessor;

pub const FORMAT_VERSION: u32 = 1;

/// A trained pipeline: preprocessing languages, vocabulary, selected
/// features and forest.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub taxonomy: Taxonomy,
    /// Stoplists applied to incoming text.
    pub stopword_langs: Vec<String>,
    pub vocabulary: Vocabulary,
    pub selected: SelectedFeatures,
    pub forest: RandomForest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: usize,
    /// Largest class probability.
    pub confidence: f64,
    pub proba: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    taxonomy: Taxonomy,
    stopword_langs: Vec<String>,
    vocabulary: Vocabulary,
    selected: SelectedFeatures,
    config: ForestConfig,
    shape: Shape,
    trees: Vec<TreeNode>,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

fn parse_unbounded<'de, T: Deserialize<'de>>(raw: &'de str) -> serde_json::Result<T> {
    // Fully grown trees can nest deeper than serde_json's default limit.
    let mut de = serde_json::Deserializer::from_str(raw);
    de.disable_recursion_limit();
    let value = T::deserialize(&mut de)?;
    de.end()?;
    Ok(value)
}

impl TrainedModel {
    /// Column vector of a preprocessed document.
    pub fn featurize(&self, tokens: &[String]) -> FeatureVector {
        self.selected.project(&vectorize(tokens, &self.vocabulary, Some(&self.selected)))
    }

    pub fn predict_tokens(&self, tokens: &[String]) -> Prediction {
        let proba = self.forest.predict_proba(&self.featurize(tokens));
        let label = argmax(&proba);
        Prediction {
            label,
            confidence: proba[label],
            proba,
        }
    }

    pub fn predict_text(&self, text: &str, pre: &Preprocessor) -> Prediction {
        self.predict_tokens(&pre.process(text, &self.stopword_langs))
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            taxonomy: self.taxonomy.clone(),
            stopword_langs: self.stopword_langs.clone(),
            vocabulary: self.vocabulary.clone(),
            selected: self.selected.clone(),
            config: self.forest.config.clone(),
            shape: self.forest.shape,
            trees: self.forest.trees.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(raw: &str) -> Result<Self> {
        let probe: VersionProbe =
            parse_unbounded(raw).map_err(|e| Error::Model(format!("unreadable model file: {e}")))?;
        if probe.format_version != FORMAT_VERSION {
            return Err(Error::Model(format!(
                "model format version {} is not supported (expected {FORMAT_VERSION})",
                probe.format_version
            )));
        }
        let file: ModelFile = parse_unbounded(raw).map_err(|e| Error::Model(format!("malformed model file: {e}")))?;
        let model = TrainedModel {
            taxonomy: file.taxonomy,
            stopword_langs: file.stopword_langs,
            vocabulary: file.vocabulary,
            selected: file.selected,
            forest: RandomForest {
                config: file.config,
                shape: file.shape,
                trees: file.trees,
            },
        };
        model.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&raw)
    }

    /// Cross-checks taxonomy, vocabulary, selection and forest dimensions.
    pub fn validate(&self) -> Result<()> {
        if self.forest.shape.n_classes != self.taxonomy.len() {
            return Err(Error::Model(format!(
                "forest predicts {} classes but the taxonomy has {}",
                self.forest.shape.n_classes,
                self.taxonomy.len()
            )));
        }
        if self.forest.shape.n_features != self.selected.len() {
            return Err(Error::Model(format!(
                "forest expects {} features but {} are selected",
                self.forest.shape.n_features,
                self.selected.len()
            )));
        }
        if let Some(e) = self.selected.entries().iter().find(|e| e.id as usize >= self.vocabulary.len()) {
            return Err(Error::Model(format!(
                "selected feature {} is outside the {}-term vocabulary",
                e.id,
                self.vocabulary.len()
            )));
        }
        self.forest.validate()
    }
}
