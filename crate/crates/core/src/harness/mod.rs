//! Experiment matrices over a corpus with one fixed split per dataset.

mod config;
mod gate;
mod report;

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{ExpType, ExperimentConfig, ExperimentSpec, GateConfig, Portion, SourcePortion};
pub use gate::{gate_sources, GateOutcome, GateTrial};
pub use report::{
    emit_report, read_report_csv, render_markdown, write_gate_audit_csv, write_outputs, write_per_class_csv,
    write_report_csv, write_splits_json, ReportFormat,
};

use crate::corpus::{filter_language, make_split, Corpus, Dataset, DatasetSplit, Manifest, Message};
use crate::error::{Error, Result};
use crate::features::{build_vocabulary, select_top_k, vectorize};
use crate::forest::{train_forest, Shape};
use crate::metrics::{evaluate, EvalReport};
use crate::model::TrainedModel;
use crate::seed;
use crate::text::{Preprocessor, TokenList};

/// A loaded corpus, its per-dataset splits and cached token lists.
pub struct Workspace {
    config: ExperimentConfig,
    corpus: Corpus,
    splits: Vec<DatasetSplit>,
    pre: Preprocessor,
    tokens: HashMap<String, Vec<TokenList>>,
    warnings: Vec<String>,
}

/// Seed of the split of `dataset` under `master_seed`.
pub fn split_seed(master_seed: u64, dataset: &str) -> u64 {
    seed::named(master_seed, dataset)
}

/// Seed of everything trained for `experiment` under `master_seed`.
pub fn experiment_seed(master_seed: u64, experiment: &str) -> u64 {
    seed::named(master_seed, experiment)
}

/// Splits every dataset of the corpus.
pub fn split_corpus(corpus: &Corpus, test_fraction: f64, master_seed: u64) -> Result<Vec<DatasetSplit>> {
    corpus
        .datasets()
        .iter()
        .map(|ds| make_split(ds, test_fraction, split_seed(master_seed, &ds.short_name)))
        .collect()
}

impl Workspace {
    /// Reads the manifest and datasets named by `config` and validates the
    /// experiments against them.
    pub fn load(config: ExperimentConfig, pre: Preprocessor) -> Result<Self> {
        let manifest = Manifest::load(&config.manifest_file())?;
        let warnings = config.validate(&manifest)?;
        let corpus = Corpus::load(&manifest)?;
        let mut ws = Self::new(config, corpus, pre)?;
        ws.warnings = warnings;
        Ok(ws)
    }

    /// Builds a workspace over an in-memory corpus, splitting every dataset.
    pub fn new(config: ExperimentConfig, corpus: Corpus, pre: Preprocessor) -> Result<Self> {
        let splits = split_corpus(&corpus, config.test_fraction, config.master_seed)?;
        Self::from_parts(config, corpus, splits, pre)
    }

    /// Uses previously computed splits. The corpus may lack messages named
    /// by the splits (test messages deleted after splitting, for instance).
    pub fn from_parts(
        config: ExperimentConfig,
        corpus: Corpus,
        splits: Vec<DatasetSplit>,
        pre: Preprocessor,
    ) -> Result<Self> {
        for spec in &config.experiments {
            spec.check().map_err(|m| {
                Error::Config(format!(
                    "experiment '{}' violates the ExperimentSpec invariant: {m}",
                    spec.name
                ))
            })?;
        }
        let names: HashSet<&str> = splits.iter().map(|s| s.dataset.as_str()).collect();
        if let Some(ds) = corpus.datasets().iter().find(|d| !names.contains(d.short_name.as_str())) {
            return Err(Error::Argument(format!("no split for dataset '{}'", ds.short_name)));
        }
        let tokens = corpus
            .datasets()
            .iter()
            .map(|ds| {
                let langs = ds.languages();
                let docs = ds.messages.par_iter().map(|m| pre.process(&m.text, &langs)).collect();
                (ds.short_name.clone(), docs)
            })
            .collect();
        Ok(Self {
            config,
            corpus,
            splits,
            pre,
            tokens,
            warnings: Vec::new(),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn corpus(&self) -> &Corpus {
        &self.corpus
    }

    pub fn splits(&self) -> &[DatasetSplit] {
        &self.splits
    }

    pub fn preprocessor(&self) -> &Preprocessor {
        &self.pre
    }

    /// Chronology warnings raised while validating the config.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn split(&self, dataset: &str) -> Result<&DatasetSplit> {
        self.splits
            .iter()
            .find(|s| s.dataset == dataset)
            .ok_or_else(|| Error::Config(format!("unknown dataset '{dataset}'")))
    }

    fn dataset(&self, name: &str) -> Result<&Dataset> {
        self.corpus
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown dataset '{name}'")))
    }

    fn n_classes(&self) -> usize {
        self.corpus.taxonomy.len()
    }

    /// Message indices of `portion`, with `train_ids` standing in for the
    /// target's train split.
    fn portion_indices(&self, portion: &SourcePortion, train_ids: &HashSet<&str>) -> Result<Vec<usize>> {
        let ds = self.dataset(&portion.dataset)?;
        let kept: Option<HashSet<String>> = match &portion.language_filter {
            Some(lang) => Some(filter_language(ds, lang)?.messages.into_iter().map(|m| m.id).collect()),
            None => None,
        };
        Ok(ds
            .messages
            .iter()
            .enumerate()
            .filter(|(_, m)| kept.as_ref().is_none_or(|k| k.contains(&m.id)))
            .filter(|(_, m)| portion.portion == Portion::Full || train_ids.contains(m.id.as_str()))
            .map(|(i, _)| i)
            .collect())
    }

    /// (dataset, message index) pairs of a training set.
    fn assemble(
        &self,
        sources: &[SourcePortion],
        target: &str,
        train_ids: &HashSet<&str>,
    ) -> Result<Vec<(usize, String, usize)>> {
        let mut seen = HashSet::new();
        for s in sources {
            if !seen.insert(s.dataset.as_str()) {
                return Err(Error::Config(format!(
                    "dataset '{}' is listed more than once in sources",
                    s.dataset
                )));
            }
        }
        let test = self.split(target)?.test_set();
        let mut out = Vec::new();
        for (n, s) in sources.iter().enumerate() {
            let ds = self.dataset(&s.dataset)?;
            for i in self.portion_indices(s, train_ids)? {
                if s.dataset == target && test.contains(ds.messages[i].id.as_str()) {
                    return Err(Error::Config(format!(
                        "training set would contain test message '{}' of {target}",
                        ds.messages[i].id
                    )));
                }
                out.push((n, s.dataset.clone(), i));
            }
        }
        Ok(out)
    }

    fn assemble_nonempty(
        &self,
        sources: &[SourcePortion],
        target: &str,
        train_ids: &HashSet<&str>,
    ) -> Result<Vec<(usize, String, usize)>> {
        let out = self.assemble(sources, target, train_ids)?;
        if out.is_empty() {
            return Err(Error::Config("assembled training set is empty".into()));
        }
        Ok(out)
    }

    /// Concatenates the messages of every source portion, tagging each with
    /// the portion's display name.
    pub fn assemble_training_set(&self, spec: &ExperimentSpec) -> Result<Vec<(Message, String)>> {
        let train_ids = self.split(&spec.target)?.train_set();
        let items = self.assemble_nonempty(&spec.sources, &spec.target, &train_ids)?;
        Ok(items
            .into_iter()
            .map(|(n, ds, i)| {
                let message = self.corpus.get(&ds).expect("assembled dataset").messages[i].clone();
                (message, spec.sources[n].display_name())
            })
            .collect())
    }

    fn labeled_docs(&self, items: &[(usize, String, usize)]) -> (Vec<TokenList>, Vec<usize>) {
        items
            .iter()
            .map(|(_, ds, i)| {
                let label = self.corpus.get(ds).expect("assembled dataset").messages[*i].label;
                (self.tokens[ds][*i].clone(), label)
            })
            .unzip()
    }

    /// Token lists and labels of the target messages named by `ids`.
    fn target_docs(&self, target: &str, ids: &HashSet<&str>) -> Result<(Vec<TokenList>, Vec<usize>)> {
        let ds = self.dataset(target)?;
        Ok(ds
            .messages
            .iter()
            .zip(&self.tokens[target])
            .filter(|(m, _)| ids.contains(m.id.as_str()))
            .map(|(m, t)| (t.clone(), m.label))
            .unzip())
    }

    /// Vocabulary, IG selection and forest on one training set.
    fn fit(&self, docs: &[TokenList], labels: &[usize], target: &str, seed: u64) -> Result<TrainedModel> {
        let classes: BTreeSet<usize> = labels.iter().copied().collect();
        if classes.len() < 2 {
            return Err(Error::Data(format!(
                "degenerate training set: {} messages covering {} class(es)",
                labels.len(),
                classes.len()
            )));
        }
        let vocabulary = build_vocabulary(docs);
        let vectors: Vec<_> = docs.iter().map(|d| vectorize(d, &vocabulary, None)).collect();
        let selected = select_top_k(&vocabulary, &vectors, labels, self.config.feature_k)?;
        let x: Vec<_> = vectors.iter().map(|v| selected.project(v)).collect();
        let mut forest_cfg = self.config.forest.clone();
        forest_cfg.seed = seed;
        let shape = Shape {
            n_features: selected.len(),
            n_classes: self.n_classes(),
        };
        let forest = train_forest(&x, labels, shape, &forest_cfg)?;
        Ok(TrainedModel {
            taxonomy: self.corpus.taxonomy.clone(),
            stopword_langs: self.dataset(target)?.languages(),
            vocabulary,
            selected,
            forest,
        })
    }

    fn score(&self, model: &TrainedModel, docs: &[TokenList], golds: &[usize]) -> Result<EvalReport> {
        let scores: Vec<Vec<f64>> = docs.par_iter().map(|d| model.predict_tokens(d).proba).collect();
        evaluate(&scores, golds, self.n_classes())
    }

    /// Trains the pipeline of `spec` without touching the target's test
    /// messages.
    pub fn train_model(&self, spec: &ExperimentSpec) -> Result<TrainedModel> {
        let train_ids = self.split(&spec.target)?.train_set();
        let items = self.assemble_nonempty(&spec.sources, &spec.target, &train_ids)?;
        let (docs, labels) = self.labeled_docs(&items);
        self.fit(&docs, &labels, &spec.target, experiment_seed(self.config.master_seed, &spec.name))
    }

    /// Trains `spec` and evaluates it on its target's fixed test split.
    pub fn run_experiment(&self, spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
        let split = self.split(&spec.target)?;
        let train_ids = split.train_set();
        let items = self.assemble_nonempty(&spec.sources, &spec.target, &train_ids)?;
        let (docs, labels) = self.labeled_docs(&items);
        let model = self.fit(&docs, &labels, &spec.target, experiment_seed(self.config.master_seed, &spec.name))?;
        let (test_docs, golds) = self.target_docs(&spec.target, &split.test_set())?;
        if test_docs.is_empty() {
            return Err(Error::Data(format!("{}: the test split is empty", spec.target)));
        }
        let eval = self.score(&model, &test_docs, &golds)?;
        let row = MatrixRow {
            experiment: spec.name.clone(),
            exp_type: spec.exp_type,
            train_spec: self.train_spec(spec),
            target_test: self.target_test(&spec.target),
            precision: Some(eval.weighted.precision),
            recall: Some(eval.weighted.recall),
            f1: Some(eval.weighted.f1),
            auc: Some(eval.weighted_auc),
            train_size: Some(labels.len()),
            test_size: golds.len(),
            test_set_digest: test_set_digest(split),
            error: None,
        };
        Ok(ExperimentOutcome { row, eval, model })
    }

    fn percent(fraction: f64) -> String {
        format!("{}%", (fraction * 100.0).round() as i64)
    }

    /// e.g. `ITEQ (100%) + CREQ (70%)`.
    pub fn train_spec(&self, spec: &ExperimentSpec) -> String {
        spec.sources
            .iter()
            .map(|s| {
                let share = match s.portion {
                    Portion::Full => "100%".to_string(),
                    Portion::TrainSplit => Self::percent(1.0 - self.config.test_fraction),
                };
                format!("{} ({share})", s.display_name())
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    fn target_test(&self, target: &str) -> String {
        format!("{target} ({})", Self::percent(self.config.test_fraction))
    }

    fn error_row(&self, spec: &ExperimentSpec, err: &Error) -> MatrixRow {
        let split = self.split(&spec.target).ok();
        MatrixRow {
            experiment: spec.name.clone(),
            exp_type: spec.exp_type,
            train_spec: self.train_spec(spec),
            target_test: self.target_test(&spec.target),
            precision: None,
            recall: None,
            f1: None,
            auc: None,
            train_size: None,
            test_size: split.map_or(0, |s| s.test_ids.len()),
            test_set_digest: split.map(test_set_digest).unwrap_or_default(),
            error: Some(err.to_string()),
        }
    }
}

/// SHA-256 over the target name and its test ids, hex encoded.
pub fn test_set_digest(split: &DatasetSplit) -> String {
    let mut hasher = Sha256::new();
    hasher.update(split.dataset.as_bytes());
    for id in &split.test_ids {
        hasher.update(b"\n");
        hasher.update(id.as_bytes());
    }
    hex::encode(hasher.finalize())
}

/// One line of the report. Metrics are empty on error rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub experiment: String,
    pub exp_type: ExpType,
    pub train_spec: String,
    pub target_test: String,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub auc: Option<f64>,
    pub train_size: Option<usize>,
    pub test_size: usize,
    pub test_set_digest: String,
    pub error: Option<String>,
}

impl MatrixRow {
    /// Target name, taken from `target_test`.
    pub fn target(&self) -> &str {
        self.target_test.split(" (").next().unwrap_or(&self.target_test)
    }
}

pub struct ExperimentOutcome {
    pub row: MatrixRow,
    pub eval: EvalReport,
    pub model: TrainedModel,
}

/// Rows in config order, with the evaluation behind each successful row
/// and the gate audit when the gate is enabled.
#[derive(Debug, Clone, Default)]
pub struct MatrixReport {
    pub rows: Vec<MatrixRow>,
    pub evaluations: Vec<Option<EvalReport>>,
    pub gate_audit: Vec<GateTrial>,
}

/// Runs every experiment of the workspace config. Experiments run in
/// parallel; results keep config order. Failures become error rows.
/// Models are returned alongside when `keep_models` is set.
pub fn run_matrix(ws: &Workspace, keep_models: bool) -> (MatrixReport, Vec<Option<TrainedModel>>) {
    let outcomes: Vec<_> = ws
        .config
        .experiments
        .par_iter()
        .map(|spec| (spec, ws.run_experiment(spec)))
        .collect();
    let mut report = MatrixReport::default();
    let mut models = Vec::new();
    for (spec, outcome) in outcomes {
        match outcome {
            Ok(o) => {
                report.rows.push(o.row);
                report.evaluations.push(Some(o.eval));
                models.push(keep_models.then_some(o.model));
            }
            Err(e) => {
                log::warn!("experiment '{}' failed: {e}", spec.name);
                report.rows.push(ws.error_row(spec, &e));
                report.evaluations.push(None);
                models.push(None);
            }
        }
    }
    if ws.config.gate.enabled {
        report.gate_audit = gate::audit_matrix(ws);
    }
    (report, models)
}
