//! Independent reference implementations and data generators shared by the
//! integration and acceptance tests. Nothing here calls the code paths it is
//! used to check.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use csrc::dataset::{ClozeExample, EncodedExample, Slot, SlotKey, SlotKind, SEQ_LEN};
use csrc::kb_graph::KnowledgeGraph;
use csrc::neural::{LstmClassifier, Mode};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// (concepts, relations, directions as 'f'/'r') with raw ids.
pub type RawPath = (Vec<u32>, Vec<u32>, Vec<char>);

/// Random multigraph as normalized triples: up to `max_nodes` concepts,
/// up to `max_edges` rows (duplicates allowed), a handful of relation types.
pub fn random_triples(rng: &mut ChaCha8Rng, max_nodes: usize, max_edges: usize) -> Vec<(String, String, String, f64)> {
    let nodes = rng.gen_range(2..=max_nodes);
    let edges = rng.gen_range(1..=max_edges);
    let rels = rng.gen_range(1..=5);
    (0..edges)
        .map(|_| {
            (
                format!("rel{}", rng.gen_range(0..rels)),
                format!("n{}", rng.gen_range(0..nodes)),
                format!("n{}", rng.gen_range(0..nodes)),
                1.0,
            )
        })
        .collect()
}

/// Depth-first enumeration that rescans the flat edge list at every step
/// instead of using adjacency indices.
pub fn brute_force_paths(g: &KnowledgeGraph, e1: u32, e2: u32, max_len: usize, directed: bool) -> BTreeSet<RawPath> {
    let edges: Vec<(u32, u32, u32)> = g
        .edges()
        .iter()
        .map(|e| (e.relation.0, e.start.0, e.end.0))
        .collect();
    let mut out = BTreeSet::new();
    let mut concepts = vec![e1];
    let mut rels = Vec::new();
    let mut dirs = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn go(
        edges: &[(u32, u32, u32)],
        e2: u32,
        max_len: usize,
        directed: bool,
        concepts: &mut Vec<u32>,
        rels: &mut Vec<u32>,
        dirs: &mut Vec<char>,
        out: &mut BTreeSet<RawPath>,
    ) {
        let here = *concepts.last().unwrap();
        if here == e2 {
            out.insert((concepts.clone(), rels.clone(), dirs.clone()));
            return;
        }
        if rels.len() == max_len {
            return;
        }
        for &(r, s, e) in edges {
            let mut steps = Vec::new();
            if s == here {
                steps.push((e, 'f'));
            }
            if !directed && e == here {
                steps.push((s, 'r'));
            }
            for (next, d) in steps {
                if concepts.contains(&next) {
                    continue;
                }
                concepts.push(next);
                rels.push(r);
                dirs.push(d);
                go(edges, e2, max_len, directed, concepts, rels, dirs, out);
                concepts.pop();
                rels.pop();
                dirs.pop();
            }
        }
    }
    go(&edges, e2, max_len, directed, &mut concepts, &mut rels, &mut dirs, &mut out);
    out
}

/// Exhaustive CART: every feature, every midpoint between distinct sorted
/// values, impurity recomputed from scratch for each candidate partition.
pub struct ReferenceTree {
    nodes: Vec<RefNode>,
}

enum RefNode {
    Leaf(usize),
    Split(usize, f64, usize, usize),
}

fn ref_gini(y: &[usize], idx: &[usize], n_classes: usize) -> f64 {
    let mut counts = vec![0.0f64; n_classes];
    for &i in idx {
        counts[y[i]] += 1.0;
    }
    let n = idx.len() as f64;
    if n == 0.0 {
        return 0.0;
    }
    // n * (1 - sum p^2)
    n * (1.0 - counts.iter().map(|c| (c / n) * (c / n)).sum::<f64>())
}

fn ref_majority(y: &[usize], idx: &[usize], n_classes: usize) -> usize {
    let mut counts = vec![0usize; n_classes];
    for &i in idx {
        counts[y[i]] += 1;
    }
    let mut best = 0;
    for c in 1..n_classes {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best
}

impl ReferenceTree {
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Self {
        let mut t = ReferenceTree { nodes: Vec::new() };
        t.grow(x, y, (0..x.len()).collect(), n_classes);
        t
    }

    fn grow(&mut self, x: &[Vec<f64>], y: &[usize], idx: Vec<usize>, n_classes: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(RefNode::Leaf(ref_majority(y, &idx, n_classes)));
        if idx.len() < 2 || idx.iter().all(|&i| y[i] == y[idx[0]]) {
            return id;
        }
        let mut best: Option<(f64, usize, f64)> = None;
        for f in 0..x[0].len() {
            let mut vals: Vec<f64> = idx.iter().map(|&i| x[i][f]).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for w in vals.windows(2) {
                let thr = w[0] + (w[1] - w[0]) / 2.0;
                let left: Vec<usize> = idx.iter().copied().filter(|&i| x[i][f] <= thr).collect();
                let right: Vec<usize> = idx.iter().copied().filter(|&i| x[i][f] > thr).collect();
                let cost = ref_gini(y, &left, n_classes) + ref_gini(y, &right, n_classes);
                if best.is_none_or(|(b, _, _)| cost < b - 1e-9) {
                    best = Some((cost, f, thr));
                }
            }
        }
        let Some((_, f, thr)) = best else { return id };
        let left: Vec<usize> = idx.iter().copied().filter(|&i| x[i][f] <= thr).collect();
        let right: Vec<usize> = idx.iter().copied().filter(|&i| x[i][f] > thr).collect();
        let l = self.grow(x, y, left, n_classes);
        let r = self.grow(x, y, right, n_classes);
        self.nodes[id] = RefNode::Split(f, thr, l, r);
        id
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                RefNode::Leaf(c) => return c,
                RefNode::Split(f, t, l, r) => i = if x[f] <= t { l } else { r },
            }
        }
    }
}

/// Largest relative error between backprop gradients and central finite
/// differences over every parameter. Relative error is
/// `|a - n| / max(|a|, |n|, floor)`.
pub fn max_gradient_error(
    model: &LstmClassifier,
    batch: &[EncodedExample],
    mode: Mode,
    seed: u64,
    step: f64,
    floor: f64,
) -> f64 {
    let (_, grads) = model.loss_and_gradients(batch, mode, seed).unwrap();
    let analytic: Vec<f64> = grads.tensors().iter().flat_map(|t| t.iter().copied()).collect();
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    let mut flat = 0;
    let n_tensors = probe.params.tensors().len();
    for t in 0..n_tensors {
        let len = probe.params.tensors()[t].len();
        for j in 0..len {
            let orig = probe.params.tensors()[t][j];
            probe.params.tensors_mut()[t][j] = orig + step;
            let (up, _) = probe.loss_and_gradients(batch, mode, seed).unwrap();
            probe.params.tensors_mut()[t][j] = orig - step;
            let (down, _) = probe.loss_and_gradients(batch, mode, seed).unwrap();
            probe.params.tensors_mut()[t][j] = orig;
            let numeric = (up - down) / (2.0 * step);
            let a = analytic[flat];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
            worst = worst.max(err);
            flat += 1;
        }
    }
    worst
}

/// Random encoded batch over `classes` relations with mixed slot kinds.
pub fn random_encoded_batch(rng: &mut ChaCha8Rng, n: usize, input_dim: usize, classes: usize) -> Vec<EncodedExample> {
    let d = input_dim - 3;
    (0..n)
        .map(|_| {
            let filled = rng.gen_range(2..=SEQ_LEN);
            let mut matrix = Array2::zeros((SEQ_LEN, input_dim));
            let mut slots = Vec::new();
            for t in 0..SEQ_LEN {
                if t >= filled {
                    slots.push(SlotKey::Pad);
                    continue;
                }
                let kind = if t < 2 { 0 } else { rng.gen_range(0..3) };
                if kind == 2 {
                    let id = rng.gen_range(0..classes);
                    slots.push(SlotKey::Relation(id));
                } else {
                    for c in 0..d {
                        matrix[[t, c]] = rng.gen_range(-1.0..1.0);
                    }
                    slots.push(SlotKey::Concept(format!("tok{}", rng.gen_range(0..4))));
                }
                matrix[[t, d + kind]] = 1.0;
            }
            EncodedExample {
                matrix,
                label: rng.gen_range(0..classes),
                slots,
            }
        })
        .collect()
}

/// Examples whose label is a fixed function of the last non-pad token.
/// Tokens carry fixed random vectors; lengths vary from 2 to 6 slots.
pub fn last_token_task(n: usize, classes: usize, vocab: usize, dim: usize, seed: u64) -> Vec<EncodedExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors: Vec<Vec<f64>> = (0..vocab)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    (0..n)
        .map(|_| {
            let len = rng.gen_range(2..=SEQ_LEN);
            let mut matrix = Array2::zeros((SEQ_LEN, dim + 3));
            let mut slots = vec![SlotKey::Pad; SEQ_LEN];
            let mut last = 0;
            for t in 0..len {
                let tok = rng.gen_range(0..vocab);
                for c in 0..dim {
                    matrix[[t, c]] = vectors[tok][c];
                }
                matrix[[t, dim + usize::from(t >= 2)]] = 1.0;
                slots[t] = SlotKey::Concept(format!("w{tok}"));
                last = tok;
            }
            EncodedExample {
                matrix,
                label: last % classes,
                slots,
            }
        })
        .collect()
}

/// Cloze corpus where a cue token predicts the target 80% of the time and
/// the target prior is skewed toward relation 0.
pub fn cue_corpus(n: usize, relations: &[String], seed: u64) -> Vec<ClozeExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = relations.len();
    (0..n)
        .map(|i| {
            let target = if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..k) };
            let cue = if rng.gen_bool(0.8) { target } else { rng.gen_range(0..k) };
            let mut slots = vec![
                Slot { kind: SlotKind::Entity, token: format!("e{}", rng.gen_range(0..50)) },
                Slot { kind: SlotKind::Entity, token: format!("e{}", rng.gen_range(0..50)) },
                Slot { kind: SlotKind::Intermediate, token: format!("cue{cue}") },
            ];
            if rng.gen_bool(0.5) {
                slots.push(Slot { kind: SlotKind::Relation, token: relations[rng.gen_range(0..k)].clone() });
            }
            slots.resize(SEQ_LEN, Slot { kind: SlotKind::Pad, token: String::new() });
            ClozeExample {
                slots,
                target: relations[target].clone(),
                pair: ("e".into(), "f".into()),
                position: 1,
                path: format!("p{i}"),
            }
        })
        .collect()
}
