//! Comparison predictors for the cloze task: uniform random, unigram prior,
//! the conditional "single" model scored by summed log-probabilities, and a
//! random forest over the flattened encoded matrices.
//!
//! Class indices follow the relation vocabulary order. Every argmax breaks
//! ties toward the smaller class index.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClozeExample, EncodedExample, SlotKind};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

fn vocab_index(vocab: &[String], name: &str) -> Result<usize> {
    vocab
        .iter()
        .position(|v| v == name)
        .ok_or_else(|| Error::InvalidArgument(format!("relation {name:?} not in vocabulary")))
}

fn argmax_first<T: PartialOrd + Copy>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// `n` uniform draws from `0..vocab_size`.
pub fn predict_random(vocab_size: usize, seed: u64, n: usize) -> Result<Vec<usize>> {
    if vocab_size == 0 {
        return Err(Error::InvalidArgument("empty relation vocabulary".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| rng.gen_range(0..vocab_size)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomModel {
    pub vocab: Vec<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnigramModel {
    pub vocab: Vec<String>,
    pub counts: Vec<u64>,
    pub total: u64,
}

pub fn train_unigram(train: &[ClozeExample], vocab: &[String]) -> Result<UnigramModel> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let mut counts = vec![0u64; vocab.len()];
    for ex in train {
        counts[vocab_index(vocab, &ex.target)?] += 1;
    }
    Ok(UnigramModel {
        vocab: vocab.to_vec(),
        counts,
        total: train.len() as u64,
    })
}

impl UnigramModel {
    /// Add-one smoothed prior.
    pub fn probability(&self, class: usize) -> f64 {
        (self.counts[class] + 1) as f64 / (self.total + self.vocab.len() as u64) as f64
    }

    pub fn predict(&self) -> usize {
        argmax_first(&self.counts)
    }
}

/// Counts of (context token, held-out relation) co-occurrences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleModel {
    pub vocab: Vec<String>,
    pub pair_counts: BTreeMap<String, Vec<u64>>,
    pub context_counts: BTreeMap<String, u64>,
}

/// Context key for a slot; relation and concept tokens live in separate namespaces.
pub fn context_key(kind: SlotKind, token: &str) -> String {
    match kind {
        SlotKind::Relation => format!("r:{token}"),
        _ => format!("c:{token}"),
    }
}

pub fn train_single(train: &[ClozeExample], vocab: &[String]) -> Result<SingleModel> {
    if train.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    let mut model = SingleModel {
        vocab: vocab.to_vec(),
        pair_counts: BTreeMap::new(),
        context_counts: BTreeMap::new(),
    };
    for ex in train {
        let r = vocab_index(vocab, &ex.target)?;
        for slot in ex.inputs() {
            let key = context_key(slot.kind, &slot.token);
            model.pair_counts.entry(key.clone()).or_insert_with(|| vec![0; vocab.len()])[r] += 1;
            *model.context_counts.entry(key).or_insert(0) += 1;
        }
    }
    Ok(model)
}

impl SingleModel {
    /// `P(r | a) = (count(a, r) + 1) / (count(a) + |vocab|)`.
    pub fn conditional(&self, context: &str, class: usize) -> f64 {
        let v = self.vocab.len() as f64;
        let joint = self.pair_counts.get(context).map_or(0, |c| c[class]) as f64;
        let marginal = self.context_counts.get(context).copied().unwrap_or(0) as f64;
        (joint + 1.0) / (marginal + v)
    }

    /// `F(r) = sum_i ln P(r | a_i)` over the example's input slots.
    pub fn score(&self, example: &ClozeExample) -> Result<Vec<f64>> {
        let keys: Vec<String> = example
            .inputs()
            .map(|s| context_key(s.kind, &s.token))
            .collect();
        if keys.is_empty() {
            return Err(Error::InvalidArgument("example has no input slots".into()));
        }
        Ok((0..self.vocab.len())
            .map(|r| keys.iter().map(|k| self.conditional(k, r).ln()).sum())
            .collect())
    }

    pub fn predict(&self, example: &ClozeExample) -> Result<usize> {
        Ok(argmax_first(&self.score(example)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    /// Features drawn per split; `None` means `floor(sqrt(n_features))`.
    pub feature_subsample: Option<usize>,
    pub min_samples_split: usize,
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: None,
            feature_subsample: None,
            min_samples_split: 2,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf { class: usize },
    /// `x[feature] <= threshold` goes left.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                TreeNode::Leaf { class } => return class,
                TreeNode::Split { feature, threshold, left, right } => {
                    i = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }
}

fn gini_weighted(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
    nf - sq / nf
}

fn majority(labels: &[usize], idx: &[usize], n_classes: usize) -> usize {
    let mut counts = vec![0usize; n_classes];
    for &i in idx {
        counts[labels[i]] += 1;
    }
    argmax_first(&counts)
}

struct TreeGrower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    n_features: usize,
    per_split: usize,
    config: &'a ForestConfig,
    nodes: Vec<TreeNode>,
}

impl TreeGrower<'_> {
    /// Best split of `idx` over `features` (ascending), minimizing summed
    /// weighted Gini impurity. Earlier features and lower thresholds win ties.
    fn best_split(&self, idx: &[usize], features: &[usize]) -> Option<(usize, f64)> {
        let mut best: Option<(f64, usize, f64)> = None;
        let n = idx.len();
        let mut total = vec![0usize; self.n_classes];
        for &i in idx {
            total[self.y[i]] += 1;
        }
        let mut sorted = idx.to_vec();
        for &f in features {
            sorted.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let mut left = vec![0usize; self.n_classes];
            let mut right = total.clone();
            for k in 0..n - 1 {
                let c = self.y[sorted[k]];
                left[c] += 1;
                right[c] -= 1;
                let (v, w) = (self.x[sorted[k]][f], self.x[sorted[k + 1]][f]);
                if v == w {
                    continue;
                }
                let cost = gini_weighted(&left, k + 1) + gini_weighted(&right, n - k - 1);
                if best.is_none_or(|(b, _, _)| cost < b - 1e-12) {
                    best = Some((cost, f, v + (w - v) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let node = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            class: majority(self.y, &idx, self.n_classes),
        });
        let pure = idx.iter().all(|&i| self.y[i] == self.y[idx[0]]);
        let depth_cap = self.config.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_cap || idx.len() < self.config.min_samples_split.max(2) {
            return node;
        }
        let mut features: Vec<usize> = if self.per_split >= self.n_features {
            (0..self.n_features).collect()
        } else {
            sample(rng, self.n_features, self.per_split).into_vec()
        };
        features.sort_unstable();
        let Some((feature, threshold)) = self.best_split(&idx, &features) else {
            return node;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[node] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        node
    }
}

/// Grow one CART tree on the rows `idx` of `x`.
pub fn grow_tree(
    x: &[Vec<f64>],
    y: &[usize],
    idx: Vec<usize>,
    n_classes: usize,
    config: &ForestConfig,
    rng: &mut ChaCha8Rng,
) -> DecisionTree {
    let n_features = x.first().map_or(0, Vec::len);
    let per_split = config
        .feature_subsample
        .unwrap_or_else(|| ((n_features as f64).sqrt().floor() as usize).max(1));
    let mut grower = TreeGrower {
        x,
        y,
        n_classes,
        n_features,
        per_split,
        config,
        nodes: Vec::new(),
    };
    grower.grow(idx, 0, rng);
    DecisionTree { nodes: grower.nodes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub vocab: Vec<String>,
    pub config: ForestConfig,
    pub seed: u64,
    pub trees: Vec<DecisionTree>,
}

/// Random forest on flattened example matrices. Tree `t` draws its bootstrap
/// sample and split features from stream `t` of a ChaCha generator seeded
/// with `seed`.
pub fn train_forest(
    train: &[EncodedExample],
    vocab: &[String],
    config: &ForestConfig,
    seed: u64,
) -> Result<ForestModel> {
    let x: Vec<Vec<f64>> = train.iter().map(EncodedExample::features).collect();
    let y: Vec<usize> = train.iter().map(|e| e.label).collect();
    train_forest_on(&x, &y, vocab, config, seed)
}

pub fn train_forest_on(
    x: &[Vec<f64>],
    y: &[usize],
    vocab: &[String],
    config: &ForestConfig,
    seed: u64,
) -> Result<ForestModel> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "need matching nonempty features and labels, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if let Some(bad) = y.iter().find(|&&c| c >= vocab.len()) {
        return Err(Error::InvalidArgument(format!("label {bad} outside vocabulary")));
    }
    if y.iter().all(|&c| c == y[0]) {
        return Err(Error::InvalidArgument("forest needs at least two classes in training data".into()));
    }
    if config.n_trees == 0 {
        return Err(Error::InvalidArgument("n_trees must be >= 1".into()));
    }
    let width = x[0].len();
    if x.iter().any(|r| r.len() != width) {
        return Err(Error::Shape("ragged feature rows".into()));
    }
    let n = x.len();
    let trees = (0..config.n_trees)
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let idx = if config.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grow_tree(x, y, idx, vocab.len(), config, &mut rng)
        })
        .collect();
    Ok(ForestModel {
        vocab: vocab.to_vec(),
        config: config.clone(),
        seed,
        trees,
    })
}

impl ForestModel {
    pub fn predict_features(&self, x: &[f64]) -> usize {
        let mut votes = vec![0usize; self.vocab.len()];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        argmax_first(&votes)
    }

    pub fn predict(&self, example: &EncodedExample) -> usize {
        self.predict_features(&example.features())
    }
}

/// A serializable baseline, tagged by kind in its JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BaselineModel {
    Random(RandomModel),
    Unigram(UnigramModel),
    Single(SingleModel),
    Forest(ForestModel),
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    provenance: String,
    model: BaselineModel,
}

const DOCUMENT_FORMAT: &str = "csrc-baseline";

impl BaselineModel {
    pub fn vocab(&self) -> &[String] {
        match self {
            BaselineModel::Random(m) => &m.vocab,
            BaselineModel::Unigram(m) => &m.vocab,
            BaselineModel::Single(m) => &m.vocab,
            BaselineModel::Forest(m) => &m.vocab,
        }
    }

    pub fn to_json(&self, provenance: &str) -> Result<String> {
        let doc = ModelDocument {
            format: DOCUMENT_FORMAT.into(),
            version: MODEL_FORMAT_VERSION,
            provenance: provenance.into(),
            model: self.clone(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    /// Parse a model document; returns the model and its provenance string.
    pub fn from_json(text: &str) -> Result<(Self, String)> {
        let header: serde_json::Value = serde_json::from_str(text)?;
        let format = header.get("format").and_then(|v| v.as_str()).unwrap_or("");
        if format != DOCUMENT_FORMAT {
            return Err(Error::Format(format!("expected {DOCUMENT_FORMAT} document, found {format:?}")));
        }
        let version = header.get("version").and_then(|v| v.as_u64()).unwrap_or(0);
        if version != MODEL_FORMAT_VERSION as u64 {
            return Err(Error::Format(format!(
                "baseline model version {version}, this build reads version {MODEL_FORMAT_VERSION}"
            )));
        }
        let doc: ModelDocument = serde_json::from_value(header)?;
        Ok((doc.model, doc.provenance))
    }
}
