//! Precision, recall, F1 and one-vs-rest AUC for multiclass predictions.
//!
//! Per-class precision, recall and F1 are ratios of confusion-matrix counts.
//! Weighted averages use class support as weights, so weighted recall is
//! exactly the accuracy. AUC is the Mann-Whitney statistic with ties
//! counted half.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::argmax;

/// Rows are gold labels, columns predicted labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    n_classes: usize,
    cells: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn from_cells(n_classes: usize, cells: Vec<u64>) -> Result<Self> {
        if cells.len() != n_classes * n_classes {
            return Err(Error::Argument(format!(
                "{} cells do not form a {n_classes}x{n_classes} matrix",
                cells.len()
            )));
        }
        Ok(Self { n_classes, cells })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn get(&self, gold: usize, predicted: usize) -> u64 {
        self.cells[gold * self.n_classes + predicted]
    }

    /// Gold count of a class.
    pub fn support(&self, class: usize) -> u64 {
        (0..self.n_classes).map(|p| self.get(class, p)).sum()
    }

    pub fn predicted(&self, class: usize) -> u64 {
        (0..self.n_classes).map(|g| self.get(g, class)).sum()
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|c| self.get(c, c)).sum()
    }

    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.cells.chunks(self.n_classes)
    }
}

pub fn confusion_matrix(preds: &[usize], golds: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if preds.len() != golds.len() {
        return Err(Error::Argument(format!(
            "{} predictions for {} gold labels",
            preds.len(),
            golds.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::Argument("no predictions to evaluate".into()));
    }
    let mut cells = vec![0u64; n_classes * n_classes];
    for (&p, &g) in preds.iter().zip(golds) {
        if p >= n_classes || g >= n_classes {
            return Err(Error::Argument(format!("label outside {n_classes} classes")));
        }
        cells[g * n_classes + p] += 1;
    }
    Ok(ConfusionMatrix { n_classes, cells })
}

/// A metric stored as an exact ratio of counts.
#[derive(Debug, Clone, Copy)]
struct Ratio {
    num: u64,
    den: u64,
}

impl Ratio {
    fn value(self) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            self.num as f64 / self.den as f64
        }
    }

    /// `weight * value` computed as `(weight * num) / den` so that the
    /// product cancels exactly when `weight == den`.
    fn weighted(self, weight: u64) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            (weight * self.num) as f64 / self.den as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// No instance was predicted as this class; precision reported as 0.
    pub precision_undefined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrfReport {
    pub per_class: Vec<ClassScores>,
    /// Support-weighted means over classes with support > 0.
    pub weighted: Averages,
    /// Unweighted means over the same classes.
    pub macro_avg: Averages,
}

pub fn prf_weighted(cm: &ConfusionMatrix) -> Result<PrfReport> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Argument("empty confusion matrix".into()));
    }
    let mut per_class = Vec::with_capacity(cm.n_classes());
    let (mut wp, mut wr, mut wf) = (0.0, 0.0, 0.0);
    let (mut mp, mut mr, mut mf, mut present) = (0.0, 0.0, 0.0, 0usize);
    for c in 0..cm.n_classes() {
        let tp = cm.get(c, c);
        let support = cm.support(c);
        let predicted = cm.predicted(c);
        let precision = Ratio { num: tp, den: predicted };
        let recall = Ratio { num: tp, den: support };
        // 2PR/(P+R) reduces to 2TP/(2TP+FP+FN).
        let f1 = Ratio {
            num: 2 * tp,
            den: predicted + support,
        };
        if support > 0 {
            wp += precision.weighted(support);
            wr += recall.weighted(support);
            wf += f1.weighted(support);
            mp += precision.value();
            mr += recall.value();
            mf += f1.value();
            present += 1;
        }
        per_class.push(ClassScores {
            support,
            precision: precision.value(),
            recall: recall.value(),
            f1: f1.value(),
            precision_undefined: predicted == 0,
        });
    }
    let n = total as f64;
    let m = present as f64;
    Ok(PrfReport {
        per_class,
        weighted: Averages {
            precision: wp / n,
            recall: wr / n,
            f1: wf / n,
        },
        macro_avg: Averages {
            precision: mp / m,
            recall: mr / m,
            f1: mf / m,
        },
    })
}

/// Mann-Whitney AUC of `scores` for the instances flagged positive.
///
/// Uses mid-ranks, which credits tied positive/negative pairs with one half.
/// `None` unless there is at least one positive and one negative.
pub fn binary_auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    assert_eq!(scores.len(), positive.len());
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of 1-based mid-ranks of the positives, doubled to stay integral.
    let mut doubled_rank_sum: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Ranks start+1 ..= end; their mean doubled is start + end + 1.
        let doubled_mid = (start + end + 1) as u64;
        let pos_in_group = order[start..end].iter().filter(|&&i| positive[i]).count() as u64;
        doubled_rank_sum += doubled_mid * pos_in_group;
        start = end;
    }
    let n_pos = n_pos as u64;
    let doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
    Some(doubled_u as f64 / (2 * n_pos * n_neg as u64) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AucReport {
    /// `None` for classes lacking a positive or a negative instance.
    pub per_class: Vec<Option<f64>>,
    /// Support-weighted mean over computable classes.
    pub weighted: f64,
}

/// One-vs-rest AUC of each class's score column.
pub fn auc_one_vs_rest(scores: &[Vec<f64>], golds: &[usize]) -> Result<AucReport> {
    if scores.len() != golds.len() {
        return Err(Error::Argument(format!("{} score vectors for {} labels", scores.len(), golds.len())));
    }
    if scores.is_empty() {
        return Err(Error::Argument("no instances to score".into()));
    }
    let n_classes = scores[0].len();
    if scores.iter().any(|s| s.len() != n_classes) {
        return Err(Error::Argument("score vectors differ in length".into()));
    }
    let mut per_class = Vec::with_capacity(n_classes);
    let (mut weighted_sum, mut weight) = (0.0, 0u64);
    for c in 0..n_classes {
        let column: Vec<f64> = scores.iter().map(|s| s[c]).collect();
        let positive: Vec<bool> = golds.iter().map(|&g| g == c).collect();
        let auc = binary_auc(&column, &positive);
        if let Some(a) = auc {
            let support = positive.iter().filter(|&&p| p).count() as u64;
            weighted_sum += support as f64 * a;
            weight += support;
        }
        per_class.push(auc);
    }
    if weight == 0 {
        return Err(Error::Data("AUC undefined for this test set".into()));
    }
    Ok(AucReport {
        per_class,
        weighted: weighted_sum / weight as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub scores: ClassScores,
    pub auc: Option<f64>,
}

impl ClassReport {
    pub fn flags(&self) -> Vec<&'static str> {
        let mut flags = Vec::new();
        if self.scores.precision_undefined {
            flags.push("undefined-as-zero");
        }
        if self.auc.is_none() {
            flags.push("auc-excluded");
        }
        flags
    }
}

/// Everything measured on one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_class: Vec<ClassReport>,
    pub weighted: Averages,
    pub weighted_auc: f64,
    pub macro_avg: Averages,
    pub confusion: ConfusionMatrix,
    pub count: usize,
}

/// Scores class-probability predictions against gold labels. Predicted
/// labels are the argmax of each score vector.
pub fn evaluate(scores: &[Vec<f64>], golds: &[usize], n_classes: usize) -> Result<EvalReport> {
    let preds: Vec<usize> = scores.iter().map(|s| argmax(s)).collect();
    let confusion = confusion_matrix(&preds, golds, n_classes)?;
    let prf = prf_weighted(&confusion)?;
    let auc = auc_one_vs_rest(scores, golds)?;
    let per_class = prf
        .per_class
        .into_iter()
        .zip(auc.per_class)
        .map(|(scores, auc)| ClassReport { scores, auc })
        .collect();
    Ok(EvalReport {
        per_class,
        weighted: prf.weighted,
        weighted_auc: auc.weighted,
        macro_avg: prf.macro_avg,
        confusion,
        count: golds.len(),
    })
}
