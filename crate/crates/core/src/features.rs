//! Uni/bi-gram vocabulary, binary document vectors and information-gain
//! feature selection.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::TokenList;

/// Unigrams of `doc` followed by its adjacent-pair bigrams (`"a b"`).
pub fn ngrams(doc: &[String]) -> impl Iterator<Item = String> + '_ {
    doc.iter()
        .cloned()
        .chain(doc.windows(2).map(|pair| format!("{} {}", pair[0], pair[1])))
}

/// N-gram lexicon with dense ids in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    pub fn term(&self, id: u32) -> &str {
        &self.terms[id as usize]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    fn insert(&mut self, term: String) {
        if !self.index.contains_key(&term) {
            self.index.insert(term.clone(), self.terms.len() as u32);
            self.terms.push(term);
        }
    }
}

impl From<Vec<String>> for Vocabulary {
    fn from(terms: Vec<String>) -> Self {
        let mut vocab = Vocabulary::default();
        for t in terms {
            vocab.insert(t);
        }
        vocab
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.terms
    }
}

/// Every unigram and adjacent bigram of the training documents.
pub fn build_vocabulary(train_docs: &[TokenList]) -> Vocabulary {
    let mut vocab = Vocabulary::default();
    for doc in train_docs {
        for gram in ngrams(doc) {
            vocab.insert(gram);
        }
    }
    vocab
}

/// Sorted, duplicate-free ids of the features present in a document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(Vec<u32>);

impl FeatureVector {
    pub fn from_ids(mut ids: Vec<u32>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Self(ids)
    }

    pub fn ids(&self) -> &[u32] {
        &self.0
    }

    pub fn contains(&self, id: u32) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

/// Binary presence vector of `doc` over `vocab`, optionally restricted to
/// the selected features. Unknown n-grams are ignored.
pub fn vectorize(doc: &[String], vocab: &Vocabulary, selected: Option<&SelectedFeatures>) -> FeatureVector {
    let ids = ngrams(doc)
        .filter_map(|g| vocab.id(&g))
        .filter(|&id| selected.is_none_or(|s| s.contains(id)))
        .collect();
    FeatureVector::from_ids(ids)
}

/// Shannon entropy in bits of a count distribution.
///
/// Counts are summed in sorted order so the result depends only on the
/// multiset of counts, not on which label carries which count.
pub fn entropy(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let mut sorted: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    sorted.sort_unstable();
    let n = total as f64;
    sorted
        .into_iter()
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn gain_from_counts(class_counts: &[u64], present_counts: &[u64]) -> f64 {
    let n: u64 = class_counts.iter().sum();
    let n_present: u64 = present_counts.iter().sum();
    if n == 0 || n_present == 0 || n_present == n {
        return 0.0;
    }
    let absent_counts: Vec<u64> = class_counts
        .iter()
        .zip(present_counts)
        .map(|(&all, &present)| all - present)
        .collect();
    let h_class = entropy(class_counts);
    let p_present = n_present as f64 / n as f64;
    let conditional =
        p_present * entropy(present_counts) + (1.0 - p_present) * entropy(&absent_counts);
    (h_class - conditional).clamp(0.0, h_class)
}

fn class_counts(labels: &[usize], n_classes: usize) -> Vec<u64> {
    let mut counts = vec![0u64; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    counts
}

fn class_count(labels: &[usize]) -> usize {
    labels.iter().map(|&l| l + 1).max().unwrap_or(0)
}

/// Information gain, in bits, of a feature's presence about the class label.
pub fn information_gain(feature: u32, vectors: &[FeatureVector], labels: &[usize]) -> f64 {
    assert_eq!(vectors.len(), labels.len(), "one label per vector");
    let n_classes = class_count(labels);
    let mut present = vec![0u64; n_classes];
    for (v, &l) in vectors.iter().zip(labels) {
        if v.contains(feature) {
            present[l] += 1;
        }
    }
    gain_from_counts(&class_counts(labels, n_classes), &present)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredFeature {
    pub id: u32,
    pub ig: f64,
}

/// Top-k features by information gain, best first, ties by smaller id.
///
/// Also defines the compact column space the classifier trains on: column
/// `j` is the `j`-th smallest selected vocabulary id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "SelectedFile", into = "SelectedFile")]
pub struct SelectedFeatures {
    entries: Vec<ScoredFeature>,
    k_requested: usize,
    columns: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct SelectedFile {
    k_requested: usize,
    features: Vec<ScoredFeature>,
}

impl From<SelectedFile> for SelectedFeatures {
    fn from(f: SelectedFile) -> Self {
        Self::new(f.features, f.k_requested)
    }
}

impl From<SelectedFeatures> for SelectedFile {
    fn from(s: SelectedFeatures) -> Self {
        SelectedFile {
            k_requested: s.k_requested,
            features: s.entries,
        }
    }
}

impl SelectedFeatures {
    fn new(entries: Vec<ScoredFeature>, k_requested: usize) -> Self {
        let mut columns: Vec<u32> = entries.iter().map(|e| e.id).collect();
        columns.sort_unstable();
        Self {
            entries,
            k_requested,
            columns,
        }
    }

    pub fn entries(&self) -> &[ScoredFeature] {
        &self.entries
    }

    pub fn k_requested(&self) -> usize {
        self.k_requested
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.columns.binary_search(&id).is_ok()
    }

    /// Maps a vocabulary-id vector onto selected columns, dropping
    /// unselected ids.
    pub fn project(&self, v: &FeatureVector) -> FeatureVector {
        // Columns are monotone in vocabulary id, so the result stays sorted.
        FeatureVector(
            v.ids()
                .iter()
                .filter_map(|id| self.columns.binary_search(id).ok().map(|c| c as u32))
                .collect(),
        )
    }

    /// Vocabulary id behind a column.
    pub fn column_id(&self, column: u32) -> u32 {
        self.columns[column as usize]
    }

    /// Diagnostic dump: `rank,ngram,ig_bits`, rank starting at 1.
    pub fn write_csv<W: Write>(&self, vocab: &Vocabulary, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["rank", "ngram", "ig_bits"])?;
        for (rank, e) in self.entries.iter().enumerate() {
            writer.write_record([(rank + 1).to_string(), vocab.term(e.id).to_string(), e.ig.to_string()])?;
        }
        writer.flush().map_err(|e| Error::io("<selected features>", e))?;
        Ok(())
    }
}

/// Scores every vocabulary feature on the training vectors and keeps the
/// best `min(k, V)`.
pub fn select_top_k(
    vocab: &Vocabulary,
    vectors: &[FeatureVector],
    labels: &[usize],
    k: usize,
) -> Result<SelectedFeatures> {
    if k < 1 {
        return Err(Error::Argument("k must be at least 1".into()));
    }
    if vectors.len() != labels.len() {
        return Err(Error::Argument(format!(
            "{} vectors but {} labels",
            vectors.len(),
            labels.len()
        )));
    }
    let n_classes = class_count(labels);
    let v = vocab.len();
    let totals = class_counts(labels, n_classes);

    // Row-major V x L table of per-class presence counts.
    let mut present = vec![0u64; v * n_classes];
    for (vector, &label) in vectors.iter().zip(labels) {
        for &id in vector.ids() {
            present[id as usize * n_classes + label] += 1;
        }
    }

    let mut scored: Vec<ScoredFeature> = if n_classes == 0 {
        (0..v as u32).map(|id| ScoredFeature { id, ig: 0.0 }).collect()
    } else {
        present
            .par_chunks(n_classes)
            .enumerate()
            .map(|(id, row)| ScoredFeature {
                id: id as u32,
                ig: gain_from_counts(&totals, row),
            })
            .collect()
    };
    scored.sort_by(|a, b| b.ig.total_cmp(&a.ig).then(a.id.cmp(&b.id)));
    scored.truncate(k.min(v));
    Ok(SelectedFeatures::new(scored, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(words: &[&str]) -> TokenList {
        words.iter().map(|s| s.to_string()).collect()
    }

    fn fv(ids: &[u32]) -> FeatureVector {
        FeatureVector::from_ids(ids.to_vec())
    }

    /// Mutual information from the joint distribution of (presence, class),
    /// a different route from the entropy-difference implementation.
    #[allow(clippy::needless_range_loop)]
    fn mutual_information_oracle(feature: u32, vectors: &[FeatureVector], labels: &[usize]) -> f64 {
        let n = labels.len() as f64;
        let n_classes = labels.iter().max().unwrap() + 1;
        let mut joint = vec![[0usize; 2]; n_classes];
        for (v, &l) in vectors.iter().zip(labels) {
            let x = v.ids().contains(&feature) as usize;
            joint[l][x] += 1;
        }
        let px = |x: usize| joint.iter().map(|row| row[x]).sum::<usize>() as f64 / n;
        let pc = |c: usize| (joint[c][0] + joint[c][1]) as f64 / n;
        let mut mi = 0.0;
        for c in 0..n_classes {
            for x in 0..2 {
                let pxc = joint[c][x] as f64 / n;
                if pxc > 0.0 {
                    mi += pxc * (pxc / (px(x) * pc(c))).log2();
                }
            }
        }
        mi
    }

    #[test]
    fn vocabulary_examples() {
        let v = build_vocabulary(&[doc(&["quake", "hits"])]);
        assert_eq!(v.terms(), ["quake", "hits", "quake hits"]);
        let v = build_vocabulary(&[doc(&["quake"]), doc(&["big", "quake"])]);
        assert_eq!(v.id("quake"), Some(0));
        assert_eq!(v.len(), 3);
        assert_eq!(build_vocabulary(&[]).len(), 0);
    }

    #[test]
    fn vectorize_examples() {
        let v = Vocabulary::from(vec!["quake".to_string(), "flood".to_string()]);
        assert_eq!(vectorize(&doc(&["quake"]), &v, None), fv(&[0]));
        assert!(vectorize(&doc(&["tsunami"]), &v, None).is_empty());
        assert_eq!(vectorize(&doc(&["quake", "quake"]), &v, None).ids(), &[0]);
        assert_eq!(vectorize(&doc(&["flood", "quake"]), &v, None).ids(), &[0, 1]);
    }

    #[test]
    fn vectorize_respects_selection() {
        let v = build_vocabulary(&[doc(&["a", "b"]), doc(&["c"])]);
        // a=0, b=1, "a b"=2, c=3
        let vectors = vec![vectorize(&doc(&["a", "b"]), &v, None), vectorize(&doc(&["c"]), &v, None)];
        let selected = select_top_k(&v, &vectors, &[0, 1], 2).unwrap();
        // Every feature is perfectly predictive; ties resolve to ids 0 and 1.
        assert_eq!(selected.entries().iter().map(|e| e.id).collect::<Vec<_>>(), [0, 1]);
        assert_eq!(vectorize(&doc(&["a", "b", "c"]), &v, Some(&selected)).ids(), &[0, 1]);
        assert_eq!(selected.project(&fv(&[1, 2, 3])).ids(), &[1]);
        assert_eq!(selected.column_id(1), 1);
    }

    #[test]
    fn ig_examples() {
        let vectors = vec![fv(&[0, 1]), fv(&[0, 1]), fv(&[1]), fv(&[1])];
        let labels = [0, 0, 1, 1];
        assert_eq!(information_gain(0, &vectors, &labels), 1.0);
        assert_eq!(information_gain(1, &vectors, &labels), 0.0);
        assert_eq!(information_gain(9, &vectors, &labels), 0.0);
    }

    #[test]
    fn ig_ten_document_oracle() {
        // Feature 0 present in docs 0,1,2,5,8; classes split 6/4.
        let present = [true, true, true, false, false, true, false, false, true, false];
        let labels = [0, 0, 0, 0, 1, 0, 1, 1, 1, 0];
        let vectors: Vec<_> = present.iter().map(|&p| if p { fv(&[0]) } else { fv(&[]) }).collect();
        // Hand-derived: H(C) = H(.6,.4); present 4:1, absent 2:3.
        let h = |ps: &[f64]| -ps.iter().filter(|&&p| p > 0.0).map(|p| p * p.log2()).sum::<f64>();
        let expected = h(&[0.6, 0.4]) - 0.5 * h(&[0.8, 0.2]) - 0.5 * h(&[0.4, 0.6]);
        let got = information_gain(0, &vectors, &labels);
        assert!((got - expected).abs() < 1e-9);
        assert!((got - mutual_information_oracle(0, &vectors, &labels)).abs() < 1e-9);
        assert!((got - 0.124_511_249_783_653_13).abs() < 1e-9, "{got}");
    }

    #[test]
    fn selection_examples() {
        let v = Vocabulary::from(vec!["a".to_string(), "b".to_string(), "c".to_string()]);
        // a: perfect (1 bit); b: partial; c: constant (0).
        let vectors = vec![fv(&[0, 1, 2]), fv(&[0, 1, 2]), fv(&[2]), fv(&[1, 2])];
        let labels = [0, 0, 1, 1];
        let s = select_top_k(&v, &vectors, &labels, 2).unwrap();
        assert_eq!(s.entries().iter().map(|e| e.id).collect::<Vec<_>>(), [0, 1]);
        assert_eq!(s.k_requested(), 2);

        let all = select_top_k(&v, &vectors, &labels, 1000).unwrap();
        assert_eq!(all.len(), 3);

        assert!(matches!(select_top_k(&v, &vectors, &labels, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn selection_tie_prefers_smaller_id() {
        let v = Vocabulary::from(vec!["a".to_string(), "b".to_string()]);
        let vectors = vec![fv(&[0, 1]), fv(&[])];
        let s = select_top_k(&v, &vectors, &[0, 1], 1).unwrap();
        assert_eq!(s.entries()[0].id, 0);
    }

    #[test]
    fn selected_csv_dump() {
        let v = Vocabulary::from(vec!["a".to_string(), "b c".to_string()]);
        let vectors = vec![fv(&[1]), fv(&[0])];
        let s = select_top_k(&v, &vectors, &[0, 1], 5).unwrap();
        let mut out = Vec::new();
        s.write_csv(&v, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "rank,ngram,ig_bits\n1,a,1\n2,b c,1\n");
    }

    fn corpus() -> impl Strategy<Value = (Vec<FeatureVector>, Vec<usize>, usize)> {
        (2usize..=6, 1usize..=30).prop_flat_map(|(classes, docs)| {
            (
                proptest::collection::vec(proptest::collection::vec(0u32..15, 0..8), docs)
                    .prop_map(|vs| vs.into_iter().map(FeatureVector::from_ids).collect::<Vec<_>>()),
                proptest::collection::vec(0..classes, docs),
                Just(classes),
            )
        })
    }

    proptest! {
        #[test]
        fn ig_matches_oracle_and_bounds((vectors, labels, classes) in corpus()) {
            for f in 0..15u32 {
                let ig = information_gain(f, &vectors, &labels);
                prop_assert!(ig >= 0.0);
                prop_assert!(ig <= (classes as f64).log2() + 1e-12);
                prop_assert!((ig - mutual_information_oracle(f, &vectors, &labels)).abs() < 1e-9);
            }
        }

        #[test]
        fn ig_invariant_under_relabeling((vectors, labels, classes) in corpus(), shift in 1usize..6) {
            let relabeled: Vec<usize> = labels.iter().map(|&l| (l + shift) % classes).collect();
            for f in 0..15u32 {
                prop_assert_eq!(information_gain(f, &vectors, &labels), information_gain(f, &vectors, &relabeled));
            }
        }

        #[test]
        fn selection_is_monotone((vectors, labels, _c) in corpus(), k in 1usize..20) {
            let vocab = Vocabulary::from((0..15).map(|i| format!("t{i}")).collect::<Vec<_>>());
            let s = select_top_k(&vocab, &vectors, &labels, k).unwrap();
            prop_assert_eq!(s.len(), k.min(15));
            let min_in = s.entries().iter().map(|e| e.ig).fold(f64::INFINITY, f64::min);
            for f in (0..15u32).filter(|&f| !s.contains(f)) {
                prop_assert!(information_gain(f, &vectors, &labels) <= min_in);
            }
            for e in s.entries() {
                prop_assert_eq!(e.ig, information_gain(e.id, &vectors, &labels));
            }
        }
    }
}
