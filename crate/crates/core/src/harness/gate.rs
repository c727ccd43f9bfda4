use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{ExpType, SourcePortion, Workspace};
use crate::corpus::make_split;
use crate::error::{Error, Result};
use crate::seed;

/// One greedy step: `candidate` tried on top of the sources accepted so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateTrial {
    /// Experiment that triggered the gate; empty for direct calls.
    pub experiment: String,
    pub target: String,
    pub step: usize,
    pub candidate: String,
    pub base_auc: f64,
    pub candidate_auc: f64,
    pub delta: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateOutcome {
    /// `base` followed by the accepted candidates.
    pub accepted: Vec<SourcePortion>,
    pub trials: Vec<GateTrial>,
    pub base_auc: f64,
}

/// Greedy forward selection of candidate sources.
///
/// The target's train split is divided again: a stratified slice of
/// `gate.validation_fraction` is held out for validation and the rest stands
/// in for the train split in `base`. The target's test split is never read.
/// Each candidate is added, in order, when it raises the weighted AUC on the
/// validation slice by at least `gate.epsilon`. A training set that is empty
/// or has a single class scores 0.5.
pub fn gate_sources(
    ws: &Workspace,
    candidates: &[SourcePortion],
    target: &str,
    base: &[SourcePortion],
) -> Result<GateOutcome> {
    let cfg = ws.config();
    let split = ws.split(target)?;
    let ds = ws.dataset(target)?;
    let train = split.train_set();
    let train_part = ds.retain_ids(|id| train.contains(id));
    let gate_seed = seed::named(cfg.master_seed, &format!("gate/{target}"));
    let sub = make_split(&train_part, cfg.gate.validation_fraction, gate_seed)?;
    let validation = sub.test_set();
    let reduced = sub.train_set();
    let (val_docs, val_golds) = ws.target_docs(target, &validation)?;
    let classes: BTreeSet<usize> = val_golds.iter().copied().collect();
    if val_golds.is_empty() {
        return Err(Error::Data(format!("{target}: the gate validation slice is empty")));
    }
    if classes.len() < 2 {
        return Err(Error::Data(format!(
            "{target}: the gate validation slice covers a single class"
        )));
    }

    let score = |sources: &[SourcePortion], step: usize| -> Result<f64> {
        let items = ws.assemble(sources, target, &reduced)?;
        let (docs, labels) = ws.labeled_docs(&items);
        if labels.iter().collect::<HashSet<_>>().len() < 2 {
            return Ok(0.5);
        }
        let model = ws.fit(&docs, &labels, target, seed::mix(gate_seed, step as u64))?;
        Ok(ws.score(&model, &val_docs, &val_golds)?.weighted_auc)
    };

    let mut current: Vec<SourcePortion> = base.to_vec();
    let base_auc = score(&current, 0)?;
    let mut current_auc = base_auc;
    let mut trials = Vec::new();
    for (i, candidate) in candidates.iter().enumerate() {
        let mut trial = current.clone();
        trial.push(candidate.clone());
        let auc = score(&trial, i + 1)?;
        let delta = auc - current_auc;
        let accepted = delta >= cfg.gate.epsilon;
        trials.push(GateTrial {
            experiment: String::new(),
            target: target.to_string(),
            step: i + 1,
            candidate: candidate.display_name(),
            base_auc: current_auc,
            candidate_auc: auc,
            delta,
            accepted,
        });
        if accepted {
            current = trial;
            current_auc = auc;
        }
    }
    Ok(GateOutcome {
        accepted: current,
        trials,
        base_auc,
    })
}

/// Gate trials for every MS, MSWT and SC experiment: the target's own
/// portions form the base, the other sources are the candidates. A gate
/// failure is logged and leaves no trials for that experiment.
pub(super) fn audit_matrix(ws: &Workspace) -> Vec<GateTrial> {
    use rayon::prelude::*;
    let runs: Vec<Vec<GateTrial>> = ws
        .config()
        .experiments
        .par_iter()
        .filter(|spec| spec.exp_type != ExpType::SingleSource)
        .map(|spec| {
            let (base, candidates): (Vec<_>, Vec<_>) =
                spec.sources.iter().cloned().partition(|s| s.dataset == spec.target);
            match gate_sources(ws, &candidates, &spec.target, &base) {
                Ok(outcome) => outcome
                    .trials
                    .into_iter()
                    .map(|t| GateTrial {
                        experiment: spec.name.clone(),
                        ..t
                    })
                    .collect(),
                Err(e) => {
                    log::warn!("gate for experiment '{}' failed: {e}", spec.name);
                    Vec::new()
                }
            }
        })
        .collect();
    runs.into_iter().flatten().collect()
}
