//! Random forest over sparse binary feature vectors.
//!
//! Trees split on feature presence, chosen by Gini impurity among a random
//! subset of candidate features at every node. Leaves keep class counts, and
//! the forest predicts the mean of the normalized leaf distributions. Tree
//! `i` draws all of its randomness from `seed::mix(config.seed, i)`, so a
//! forest is identical however many threads train it.

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::seed;

/// Number of candidate features drawn at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "MaxFeaturesRepr", into = "MaxFeaturesRepr")]
pub enum MaxFeatures {
    /// floor(sqrt(M)), at least 1.
    #[default]
    Sqrt,
    Count(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MaxFeaturesRepr {
    Count(usize),
    Name(String),
}

impl TryFrom<MaxFeaturesRepr> for MaxFeatures {
    type Error = String;

    fn try_from(raw: MaxFeaturesRepr) -> std::result::Result<Self, String> {
        match raw {
            MaxFeaturesRepr::Count(n) => Ok(MaxFeatures::Count(n)),
            MaxFeaturesRepr::Name(s) if s == "sqrt" => Ok(MaxFeatures::Sqrt),
            MaxFeaturesRepr::Name(s) => Err(format!("max_features must be \"sqrt\" or an integer, got {s:?}")),
        }
    }
}

impl From<MaxFeatures> for MaxFeaturesRepr {
    fn from(m: MaxFeatures) -> Self {
        match m {
            MaxFeatures::Sqrt => MaxFeaturesRepr::Name("sqrt".into()),
            MaxFeatures::Count(n) => MaxFeaturesRepr::Count(n),
        }
    }
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((n_features as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::Count(n) => n,
        }
        .clamp(1, n_features.max(1))
    }
}

fn default_trees() -> usize {
    100
}

fn default_min_samples_split() -> usize {
    2
}

fn default_bootstrap() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestConfig {
    #[serde(default = "default_trees")]
    pub n_trees: usize,
    #[serde(default)]
    pub max_features: MaxFeatures,
    /// `None` grows trees until the other stopping rules fire.
    #[serde(default)]
    pub max_depth: Option<usize>,
    #[serde(default = "default_min_samples_split")]
    pub min_samples_split: usize,
    /// Draw a bootstrap sample per tree; disabling it trains every tree on
    /// the full set.
    #[serde(default = "default_bootstrap")]
    pub bootstrap: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: default_trees(),
            max_features: MaxFeatures::Sqrt,
            max_depth: None,
            min_samples_split: default_min_samples_split(),
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::Argument("forest.n_trees must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Argument("forest.min_samples_split must be at least 2".into()));
        }
        if self.max_features == MaxFeatures::Count(0) {
            return Err(Error::Argument("forest.max_features must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: u32,
        absent: Box<TreeNode>,
        present: Box<TreeNode>,
    },
    Leaf {
        counts: Vec<u32>,
    },
}

impl TreeNode {
    /// Class counts of the leaf `x` falls into.
    pub fn leaf_counts(&self, x: &FeatureVector) -> &[u32] {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { counts } => return counts,
                TreeNode::Split {
                    feature,
                    absent,
                    present,
                } => {
                    node = if x.contains(*feature) { present } else { absent };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { absent, present, .. } => 1 + absent.depth().max(present.depth()),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { absent, present, .. } => absent.leaves() + present.leaves(),
        }
    }

    /// Largest feature id used by any split.
    pub fn max_feature(&self) -> Option<u32> {
        match self {
            TreeNode::Leaf { .. } => None,
            TreeNode::Split {
                feature,
                absent,
                present,
            } => [Some(*feature), absent.max_feature(), present.max_feature()]
                .into_iter()
                .flatten()
                .max(),
        }
    }

    fn check(&self, n_classes: usize) -> bool {
        match self {
            TreeNode::Leaf { counts } => counts.len() == n_classes && counts.iter().any(|&c| c > 0),
            TreeNode::Split { absent, present, .. } => absent.check(n_classes) && present.check(n_classes),
        }
    }
}

/// Dimensions of the training problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub n_features: usize,
    pub n_classes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: u32,
    /// Gini impurity decrease (parent minus weighted children).
    pub decrease: f64,
}

pub fn gini(counts: &[u32]) -> f64 {
    let n: u32 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = f64::from(n);
    1.0 - counts.iter().map(|&c| (f64::from(c) / n).powi(2)).sum::<f64>()
}

const NO_SLOT: u32 = u32::MAX;

/// Scratch space for scoring candidate splits.
struct SplitScorer {
    slot: Vec<u32>,
    present: Vec<u32>,
    absent: Vec<u32>,
}

impl SplitScorer {
    fn new(n_features: usize) -> Self {
        Self {
            slot: vec![NO_SLOT; n_features],
            present: Vec::new(),
            absent: Vec::new(),
        }
    }

    /// Best candidate by Gini decrease among those that put samples on both
    /// sides; ties go to the smaller feature id. A zero decrease is accepted
    /// when nothing better exists, so impure nodes keep splitting as long as
    /// some candidate separates them.
    fn best(
        &mut self,
        x: &[FeatureVector],
        y: &[usize],
        samples: &[usize],
        candidates: &[u32],
        n_classes: usize,
    ) -> Option<Split> {
        let width = candidates.len() * n_classes;
        self.present.clear();
        self.present.resize(width, 0);
        for (j, &f) in candidates.iter().enumerate() {
            self.slot[f as usize] = j as u32;
        }
        let mut parent = vec![0u32; n_classes];
        for &i in samples {
            let label = y[i];
            parent[label] += 1;
            for &f in x[i].ids() {
                let j = self.slot[f as usize];
                if j != NO_SLOT {
                    self.present[j as usize * n_classes + label] += 1;
                }
            }
        }
        for &f in candidates {
            self.slot[f as usize] = NO_SLOT;
        }

        let n = samples.len() as f64;
        let parent_gini = gini(&parent);
        let mut best: Option<Split> = None;
        for (j, &feature) in candidates.iter().enumerate() {
            let present = &self.present[j * n_classes..(j + 1) * n_classes];
            let n_present: u32 = present.iter().sum();
            if n_present == 0 || n_present as usize == samples.len() {
                continue;
            }
            self.absent.clear();
            self.absent.extend(parent.iter().zip(present).map(|(&a, &p)| a - p));
            let w_present = f64::from(n_present) / n;
            let decrease = parent_gini - w_present * gini(present) - (1.0 - w_present) * gini(&self.absent);
            let better = match best {
                None => true,
                Some(b) => decrease > b.decrease || (decrease == b.decrease && feature < b.feature),
            };
            if better {
                best = Some(Split { feature, decrease });
            }
        }
        best
    }
}

/// Best split of `samples` (indices into `x`/`y`) among `candidates`.
pub fn best_split(
    x: &[FeatureVector],
    y: &[usize],
    samples: &[usize],
    candidates: &[u32],
    shape: Shape,
) -> Option<Split> {
    SplitScorer::new(shape.n_features).best(x, y, samples, candidates, shape.n_classes)
}

struct Grower<'a> {
    x: &'a [FeatureVector],
    y: &'a [usize],
    shape: Shape,
    cfg: &'a ForestConfig,
    max_features: usize,
    rng: ChaCha8Rng,
    scorer: SplitScorer,
}

impl Grower<'_> {
    fn leaf(&self, samples: &[usize]) -> TreeNode {
        let mut counts = vec![0u32; self.shape.n_classes];
        for &i in samples {
            counts[self.y[i]] += 1;
        }
        TreeNode::Leaf { counts }
    }

    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> TreeNode {
        let first = self.y[samples[0]];
        let pure = samples.iter().all(|&i| self.y[i] == first);
        let depth_reached = self.cfg.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || samples.len() < self.cfg.min_samples_split {
            return self.leaf(&samples);
        }
        let candidates: Vec<u32> = index::sample(&mut self.rng, self.shape.n_features, self.max_features)
            .into_iter()
            .map(|f| f as u32)
            .collect();
        let Some(split) = self
            .scorer
            .best(self.x, self.y, &samples, &candidates, self.shape.n_classes)
        else {
            return self.leaf(&samples);
        };
        let (present, absent): (Vec<usize>, Vec<usize>) =
            samples.into_iter().partition(|&i| self.x[i].contains(split.feature));
        let absent = Box::new(self.grow(absent, depth + 1));
        let present = Box::new(self.grow(present, depth + 1));
        TreeNode::Split {
            feature: split.feature,
            absent,
            present,
        }
    }
}

/// Grows one tree on a bootstrap sample (or the full set when bootstrapping
/// is disabled).
pub fn train_tree(
    x: &[FeatureVector],
    y: &[usize],
    shape: Shape,
    rng_seed: u64,
    cfg: &ForestConfig,
) -> TreeNode {
    assert!(!x.is_empty() && x.len() == y.len(), "train_tree needs aligned, non-empty samples");
    let mut rng = seed::rng(rng_seed);
    let n = x.len();
    let samples: Vec<usize> = if cfg.bootstrap {
        (0..n).map(|_| rng.gen_range(0..n)).collect()
    } else {
        (0..n).collect()
    };
    let mut grower = Grower {
        x,
        y,
        shape,
        cfg,
        max_features: cfg.max_features.resolve(shape.n_features),
        rng,
        scorer: SplitScorer::new(shape.n_features),
    };
    grower.grow(samples, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub config: ForestConfig,
    pub shape: Shape,
    pub trees: Vec<TreeNode>,
}

/// Trains `cfg.n_trees` trees in parallel on the current rayon pool.
pub fn train_forest(x: &[FeatureVector], y: &[usize], shape: Shape, cfg: &ForestConfig) -> Result<RandomForest> {
    cfg.validate()?;
    if x.is_empty() {
        return Err(Error::Data("cannot train a forest on an empty training set".into()));
    }
    if x.len() != y.len() {
        return Err(Error::Argument(format!("{} vectors but {} labels", x.len(), y.len())));
    }
    if shape.n_features == 0 {
        return Err(Error::Data("cannot train a forest on an empty feature space".into()));
    }
    if let Some(&bad) = y.iter().find(|&&l| l >= shape.n_classes) {
        return Err(Error::Argument(format!("label {bad} outside {} classes", shape.n_classes)));
    }
    if let Some(bad) = x.iter().flat_map(|v| v.ids().last()).find(|&&f| f as usize >= shape.n_features) {
        return Err(Error::Argument(format!("feature {bad} outside {} features", shape.n_features)));
    }
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|i| train_tree(x, y, shape, seed::mix(cfg.seed, i as u64), cfg))
        .collect();
    Ok(RandomForest {
        config: cfg.clone(),
        shape,
        trees,
    })
}

impl RandomForest {
    /// Mean over trees of each reached leaf's normalized class counts.
    pub fn predict_proba(&self, x: &FeatureVector) -> Vec<f64> {
        let mut proba = vec![0.0; self.shape.n_classes];
        for tree in &self.trees {
            let counts = tree.leaf_counts(x);
            let total = f64::from(counts.iter().sum::<u32>());
            for (p, &c) in proba.iter_mut().zip(counts) {
                *p += f64::from(c) / total;
            }
        }
        let n = self.trees.len() as f64;
        proba.iter_mut().for_each(|p| *p /= n);
        proba
    }

    pub fn predict_label(&self, x: &FeatureVector) -> usize {
        argmax(&self.predict_proba(x))
    }

    /// Structural sanity check for models read from disk.
    pub fn validate(&self) -> Result<()> {
        if self.trees.len() != self.config.n_trees || self.trees.is_empty() {
            return Err(Error::Model(format!(
                "forest declares {} trees but holds {}",
                self.config.n_trees,
                self.trees.len()
            )));
        }
        for (i, tree) in self.trees.iter().enumerate() {
            if !tree.check(self.shape.n_classes) {
                return Err(Error::Model(format!("tree {i} has malformed leaves")));
            }
            if tree.max_feature().is_some_and(|f| f as usize >= self.shape.n_features) {
                return Err(Error::Model(format!("tree {i} splits on a feature outside the model")));
            }
        }
        Ok(())
    }
}

/// Index of the largest value; the first one wins exact ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fv(ids: &[u32]) -> FeatureVector {
        FeatureVector::from_ids(ids.to_vec())
    }

    fn leaf(counts: &[u32]) -> TreeNode {
        TreeNode::Leaf {
            counts: counts.to_vec(),
        }
    }

    fn full_tree_cfg(n_features: usize) -> ForestConfig {
        ForestConfig {
            n_trees: 1,
            max_features: MaxFeatures::Count(n_features),
            bootstrap: false,
            ..ForestConfig::default()
        }
    }

    #[test]
    fn max_features_resolution() {
        assert_eq!(MaxFeatures::Sqrt.resolve(1000), 31);
        assert_eq!(MaxFeatures::Sqrt.resolve(3), 1);
        assert_eq!(MaxFeatures::Count(50).resolve(10), 10);
    }

    #[test]
    fn config_serde() {
        let cfg: ForestConfig = serde_json::from_str(r#"{"max_features": 7, "seed": 3}"#).unwrap();
        assert_eq!(cfg.max_features, MaxFeatures::Count(7));
        assert_eq!(cfg.n_trees, 100);
        let cfg: ForestConfig = serde_json::from_str(r#"{"max_features": "sqrt"}"#).unwrap();
        assert_eq!(cfg.max_features, MaxFeatures::Sqrt);
        assert!(serde_json::from_str::<ForestConfig>(r#"{"max_features": "log2"}"#).is_err());
        assert!(serde_json::from_str::<ForestConfig>(r#"{"trees": 5}"#).is_err());
        let round: ForestConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(round, cfg);
    }

    #[test]
    fn config_validation() {
        let bad = ForestConfig {
            min_samples_split: 1,
            ..ForestConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = ForestConfig {
            n_trees: 0,
            ..ForestConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_class_is_one_leaf() {
        let x = vec![fv(&[0]), fv(&[1]), fv(&[0, 1])];
        let y = vec![2, 2, 2];
        let shape = Shape { n_features: 2, n_classes: 3 };
        let tree = train_tree(&x, &y, shape, 1, &ForestConfig::default());
        match tree {
            TreeNode::Leaf { counts } => {
                assert_eq!(counts[0] + counts[1], 0);
                assert_eq!(counts[2], 3);
            }
            other => panic!("expected a leaf, got {other:?}"),
        }
    }

    #[test]
    fn four_distinguishing_features() {
        let x = vec![fv(&[0]), fv(&[1]), fv(&[2]), fv(&[3])];
        let y = vec![0, 1, 2, 3];
        let shape = Shape { n_features: 4, n_classes: 4 };
        let tree = train_tree(&x, &y, shape, 9, &full_tree_cfg(4));
        for (v, &label) in x.iter().zip(&y) {
            assert_eq!(argmax(&tree.leaf_counts(v).iter().map(|&c| f64::from(c)).collect::<Vec<_>>()), label);
        }
    }

    #[test]
    fn xor_is_separated_by_zero_gain_splits() {
        let x = vec![fv(&[]), fv(&[0, 1]), fv(&[0]), fv(&[1])];
        let y = vec![0, 0, 1, 1];
        let shape = Shape { n_features: 2, n_classes: 2 };
        let tree = train_tree(&x, &y, shape, 0, &full_tree_cfg(2));
        for (v, &label) in x.iter().zip(&y) {
            let counts = tree.leaf_counts(v);
            assert_eq!(counts.iter().sum::<u32>(), counts[label]);
        }
    }

    #[test]
    fn depth_limit() {
        let x: Vec<_> = (0..8).map(|i| fv(&[i])).collect();
        let y: Vec<_> = (0..8).map(|i| i % 2).collect();
        let cfg = ForestConfig {
            max_depth: Some(2),
            ..full_tree_cfg(8)
        };
        let tree = train_tree(&x, &y, Shape { n_features: 8, n_classes: 2 }, 0, &cfg);
        assert!(tree.depth() <= 2);
    }

    #[test]
    fn tree_determinism() {
        let x: Vec<_> = (0..30).map(|i| fv(&[i % 7, i % 5 + 7])).collect();
        let y: Vec<_> = (0..30).map(|i| (i % 3) as usize).collect();
        let shape = Shape { n_features: 12, n_classes: 3 };
        let cfg = ForestConfig::default();
        assert_eq!(train_tree(&x, &y, shape, 77, &cfg), train_tree(&x, &y, shape, 77, &cfg));
    }

    #[test]
    fn forest_size_and_errors() {
        let x = vec![fv(&[0]), fv(&[1])];
        let y = vec![0, 1];
        let shape = Shape { n_features: 2, n_classes: 2 };
        let forest = train_forest(&x, &y, shape, &ForestConfig::default()).unwrap();
        assert_eq!(forest.trees.len(), 100);
        forest.validate().unwrap();

        assert!(matches!(train_forest(&[], &[], shape, &ForestConfig::default()), Err(Error::Data(_))));
        let empty_space = Shape { n_features: 0, n_classes: 2 };
        assert!(matches!(train_forest(&x, &y, empty_space, &ForestConfig::default()), Err(Error::Data(_))));
        assert!(train_forest(&[fv(&[5])], &[0], shape, &ForestConfig::default()).is_err());
    }

    #[test]
    fn proba_averages_leaf_distributions() {
        let forest = RandomForest {
            config: ForestConfig {
                n_trees: 4,
                ..ForestConfig::default()
            },
            shape: Shape { n_features: 1, n_classes: 2 },
            trees: vec![leaf(&[3, 0]), leaf(&[1, 0]), leaf(&[5, 0]), leaf(&[0, 2])],
        };
        assert_eq!(forest.predict_proba(&fv(&[])), vec![0.75, 0.25]);
        assert_eq!(forest.predict_label(&fv(&[])), 0);
    }

    #[test]
    fn empty_vector_follows_absent_branches() {
        // Hand replay: tree 1 sends an empty vector to [1, 3] (0.25, 0.75);
        // tree 2 to [2, 2] (0.5, 0.5). Mean: (0.375, 0.625).
        let t1 = TreeNode::Split {
            feature: 0,
            absent: Box::new(leaf(&[1, 3])),
            present: Box::new(leaf(&[4, 0])),
        };
        let t2 = TreeNode::Split {
            feature: 1,
            absent: Box::new(TreeNode::Split {
                feature: 0,
                absent: Box::new(leaf(&[2, 2])),
                present: Box::new(leaf(&[0, 1])),
            }),
            present: Box::new(leaf(&[9, 1])),
        };
        let forest = RandomForest {
            config: ForestConfig {
                n_trees: 2,
                ..ForestConfig::default()
            },
            shape: Shape { n_features: 2, n_classes: 2 },
            trees: vec![t1, t2],
        };
        assert_eq!(forest.predict_proba(&fv(&[])), vec![0.375, 0.625]);
        assert_eq!(forest.predict_label(&fv(&[])), 1);
    }

    #[test]
    fn argmax_ties_pick_first() {
        assert_eq!(argmax(&[0.7, 0.3]), 0);
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
    }

    /// Impurity decrease computed from scratch for one feature.
    fn decrease_oracle(x: &[FeatureVector], y: &[usize], samples: &[usize], f: u32, n_classes: usize) -> Option<f64> {
        let mut present = vec![0u32; n_classes];
        let mut absent = vec![0u32; n_classes];
        for &i in samples {
            if x[i].ids().contains(&f) {
                present[y[i]] += 1;
            } else {
                absent[y[i]] += 1;
            }
        }
        let (np, na) = (present.iter().sum::<u32>(), absent.iter().sum::<u32>());
        if np == 0 || na == 0 {
            return None;
        }
        let all: Vec<u32> = present.iter().zip(&absent).map(|(a, b)| a + b).collect();
        let n = f64::from(np + na);
        Some(gini(&all) - f64::from(np) / n * gini(&present) - f64::from(na) / n * gini(&absent))
    }

    fn node() -> impl Strategy<Value = (Vec<FeatureVector>, Vec<usize>, Vec<u32>)> {
        (1usize..=20, 1usize..=10).prop_flat_map(|(n, m)| {
            (
                proptest::collection::vec(proptest::collection::vec(0..m as u32, 0..m), n)
                    .prop_map(|vs| vs.into_iter().map(FeatureVector::from_ids).collect::<Vec<_>>()),
                proptest::collection::vec(0usize..3, n),
                proptest::sample::subsequence((0..m as u32).collect::<Vec<_>>(), 1..=m),
            )
        })
    }

    proptest! {
        #[test]
        fn gini_split_is_exhaustive_best((x, y, candidates) in node()) {
            let samples: Vec<usize> = (0..x.len()).collect();
            let shape = Shape { n_features: 10, n_classes: 3 };
            let got = best_split(&x, &y, &samples, &candidates, shape);
            let oracle: Vec<(u32, f64)> = candidates
                .iter()
                .filter_map(|&f| decrease_oracle(&x, &y, &samples, f, 3).map(|d| (f, d)))
                .collect();
            match got {
                None => prop_assert!(oracle.is_empty()),
                Some(split) => {
                    let max = oracle.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!((split.decrease - max).abs() < 1e-12);
                    let own = oracle.iter().find(|o| o.0 == split.feature).unwrap().1;
                    prop_assert!((own - max).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn proba_is_distribution_and_label_is_argmax(
            seed in any::<u64>(),
            inputs in proptest::collection::vec(proptest::collection::vec(0u32..12, 0..6), 1..40),
        ) {
            let x: Vec<_> = (0..40u32).map(|i| fv(&[i % 12, (i * 7) % 12])).collect();
            let y: Vec<_> = (0..40).map(|i| i % 3).collect();
            let cfg = ForestConfig { n_trees: 7, seed, ..ForestConfig::default() };
            let forest = train_forest(&x, &y, Shape { n_features: 12, n_classes: 3 }, &cfg).unwrap();
            for ids in inputs {
                let v = FeatureVector::from_ids(ids);
                let p = forest.predict_proba(&v);
                prop_assert!(p.iter().all(|&q| q >= 0.0));
                prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert_eq!(forest.predict_label(&v), argmax(&p));
            }
        }
    }
}
