use std::collections::HashSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::seed;

/// A stratified train/test partition of one dataset's message ids.
///
/// Both id lists follow the dataset's message order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub dataset: String,
    pub seed: u64,
    pub test_fraction: f64,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
}

impl DatasetSplit {
    pub fn test_set(&self) -> HashSet<&str> {
        self.test_ids.iter().map(String::as_str).collect()
    }

    pub fn train_set(&self) -> HashSet<&str> {
        self.train_ids.iter().map(String::as_str).collect()
    }
}

/// round(fraction * n) with halves rounded up. The slack absorbs binary
/// representation error in fractions such as 0.3.
pub(crate) fn stratum_size(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64) + 0.5 + 1e-9).floor() as usize
}

/// Splits each label's messages so that `round(test_fraction * n_c)` go to
/// the test side, choosing them by a seeded shuffle.
pub fn make_split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<DatasetSplit> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Argument(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n_labels = ds.messages.iter().map(|m| m.label + 1).max().unwrap_or(0);
    let mut by_label: Vec<Vec<usize>> = vec![Vec::new(); n_labels];
    for (i, m) in ds.messages.iter().enumerate() {
        by_label[m.label].push(i);
    }

    let mut is_test = vec![false; ds.messages.len()];
    for (label, mut members) in by_label.into_iter().enumerate() {
        let take = stratum_size(test_fraction, members.len());
        members.shuffle(&mut seed::rng(seed::mix(seed, label as u64)));
        for &i in &members[..take] {
            is_test[i] = true;
        }
    }

    let (mut train_ids, mut test_ids) = (Vec::new(), Vec::new());
    for (m, test) in ds.messages.iter().zip(is_test) {
        if test {
            test_ids.push(m.id.clone());
        } else {
            train_ids.push(m.id.clone());
        }
    }
    Ok(DatasetSplit {
        dataset: ds.short_name.clone(),
        seed,
        test_fraction,
        train_ids,
        test_ids,
    })
}
