//! Cloze examples built from relation paths, grouped train/dev/test splits,
//! and the numeric encoding fed to the forest and the LSTM.
//!
//! A path of size k yields k examples, one per held-out relation. Inputs
//! always start with the two endpoint entities and follow this slot layout
//! (X = intermediate concept, R = relation):
//!
//! | size | held out | input slots               |
//! |------|----------|---------------------------|
//! | 1    | R1       | e1 e2                     |
//! | 2    | R1       | e1 e2 X1                  |
//! | 2    | R2       | e1 e2 X1 R1               |
//! | 3    | R1       | e1 e2 X1                  |
//! | 3    | R2       | e1 e2 X2 X1 R1            |
//! | 3    | R3       | e1 e2 X2 R2 X1 R1         |
//!
//! Every example is padded to [`SEQ_LEN`] slots.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use ndarray::{s, Array2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distsem::EmbeddingTable;
use crate::error::{Error, Result};
use crate::kb_graph::KnowledgeGraph;
use crate::neural::RelationEmbedder;
use crate::path_search::RelationPath;

pub const SEQ_LEN: usize = 6;
/// Width of the token-type one-hot appended to each row.
pub const TYPE_WIDTH: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotKind {
    Entity,
    Intermediate,
    Relation,
    Pad,
}

impl SlotKind {
    fn type_column(self) -> Option<usize> {
        match self {
            SlotKind::Entity => Some(0),
            SlotKind::Intermediate => Some(1),
            SlotKind::Relation => Some(2),
            SlotKind::Pad => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub kind: SlotKind,
    pub token: String,
}

impl Slot {
    pub fn pad() -> Self {
        Slot {
            kind: SlotKind::Pad,
            token: String::new(),
        }
    }

    fn new(kind: SlotKind, token: &str) -> Self {
        Slot {
            kind,
            token: token.to_string(),
        }
    }

    pub fn is_pad(&self) -> bool {
        self.kind == SlotKind::Pad
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClozeExample {
    pub slots: Vec<Slot>,
    /// Held-out relation name.
    pub target: String,
    pub pair: (String, String),
    /// 1-based index of the held-out relation along the source path.
    pub position: usize,
    /// Rendering of the source path; examples sharing it form one split group.
    pub path: String,
}

impl ClozeExample {
    /// Non-pad input slots in order.
    pub fn inputs(&self) -> impl Iterator<Item = &Slot> {
        self.slots.iter().filter(|s| !s.is_pad())
    }

    /// Structural checks applied when reading examples back from disk.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.slots.len() != SEQ_LEN {
            return Err(format!("expected {SEQ_LEN} slots, found {}", self.slots.len()));
        }
        let populated = self.slots.iter().take_while(|s| !s.is_pad()).count();
        if self.slots[populated..].iter().any(|s| !s.is_pad()) {
            return Err("non-pad slot after padding".into());
        }
        if self.slots.iter().any(|s| s.is_pad() != s.token.is_empty()) {
            return Err("pad slots must have an empty token and others a nonempty one".into());
        }
        if self.target.is_empty() {
            return Err("empty target".into());
        }
        if self.position == 0 {
            return Err("position is 1-based".into());
        }
        Ok(())
    }
}

/// Cloze examples for every held-out relation of every path.
pub fn build_examples(g: &KnowledgeGraph, paths: &[RelationPath]) -> Result<Vec<ClozeExample>> {
    let mut out = Vec::new();
    for p in paths {
        let k = p.len();
        if k == 0 || k > 3 {
            return Err(Error::InvalidArgument(format!(
                "path size must be 1..=3, got {k}"
            )));
        }
        let c = |i: usize| g.concept_name(p.concepts[i]);
        let r = |i: usize| g.relation_name(p.relations[i]);
        let e1 = Slot::new(SlotKind::Entity, c(0));
        let e2 = Slot::new(SlotKind::Entity, c(k));
        let x = |i: usize| Slot::new(SlotKind::Intermediate, c(i));
        let rel = |i: usize| Slot::new(SlotKind::Relation, r(i - 1));

        let inputs: Vec<Vec<Slot>> = match k {
            1 => vec![vec![]],
            2 => vec![vec![x(1)], vec![x(1), rel(1)]],
            _ => vec![
                vec![x(1)],
                vec![x(2), x(1), rel(1)],
                vec![x(2), rel(2), x(1), rel(1)],
            ],
        };
        let rendered = p.render(g);
        for (pos, tail) in inputs.into_iter().enumerate() {
            let mut slots = vec![e1.clone(), e2.clone()];
            slots.extend(tail);
            slots.resize(SEQ_LEN, Slot::pad());
            out.push(ClozeExample {
                slots,
                target: r(pos).to_string(),
                pair: (c(0).to_string(), c(k).to_string()),
                position: pos + 1,
                path: rendered.clone(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<ClozeExample>,
    pub dev: Vec<ClozeExample>,
    pub test: Vec<ClozeExample>,
    pub seed: u64,
}

/// Shuffle source-path groups with a seeded RNG and deal them out: test
/// first until it holds `floor(n * test_fraction)` examples, then dev until
/// it holds `floor(remaining * dev_fraction_of_train)`, the rest to train.
pub fn split(
    examples: Vec<ClozeExample>,
    test_fraction: f64,
    dev_fraction_of_train: f64,
    seed: u64,
) -> Result<DatasetSplit> {
    for (name, f) in [("test_fraction", test_fraction), ("dev_fraction_of_train", dev_fraction_of_train)] {
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidArgument(format!("{name} must be in (0, 1), got {f}")));
        }
    }
    let n = examples.len();
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<ClozeExample>> = HashMap::new();
    for ex in examples {
        let key = ex.path.clone();
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(ex);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let test_target = (n as f64 * test_fraction).floor() as usize;
    let mut test = Vec::new();
    let mut dev = Vec::new();
    let mut train = Vec::new();
    let mut dev_target = None;
    for key in order {
        let group = groups.remove(&key).unwrap();
        if test.len() < test_target {
            test.extend(group);
            continue;
        }
        let target = *dev_target
            .get_or_insert_with(|| ((n - test.len()) as f64 * dev_fraction_of_train).floor() as usize);
        if dev.len() < target {
            dev.extend(group);
        } else {
            train.extend(group);
        }
    }
    if train.is_empty() || dev.is_empty() || test.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{n} examples cannot fill train/dev/test (got {}/{}/{})",
            train.len(),
            dev.len(),
            test.len()
        )));
    }
    Ok(DatasetSplit {
        train,
        dev,
        test,
        seed,
    })
}

/// Reference to the embedding source of one encoded row.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SlotKey {
    Pad,
    Concept(String),
    Relation(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedExample {
    /// `SEQ_LEN x (d + 3)`: token vector then entity/intermediate/relation one-hot.
    pub matrix: Array2<f64>,
    pub label: usize,
    pub slots: Vec<SlotKey>,
}

impl EncodedExample {
    pub fn width(&self) -> usize {
        self.matrix.ncols()
    }

    /// Row-major flattening used as forest features.
    pub fn features(&self) -> Vec<f64> {
        self.matrix.iter().copied().collect()
    }
}

pub fn encode(
    example: &ClozeExample,
    table: &EmbeddingTable,
    relations: &RelationEmbedder,
) -> Result<EncodedExample> {
    let d = table.dim();
    if relations.dim() != d {
        return Err(Error::DimMismatch {
            expected: d,
            actual: relations.dim(),
        });
    }
    if example.slots.len() != SEQ_LEN {
        return Err(Error::Shape(format!(
            "example has {} slots, expected {SEQ_LEN}",
            example.slots.len()
        )));
    }
    let label = relations
        .index_of(&example.target)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown relation {:?}", example.target)))?;
    let mut matrix = Array2::zeros((SEQ_LEN, d + TYPE_WIDTH));
    let mut keys = Vec::with_capacity(SEQ_LEN);
    for (row, slot) in example.slots.iter().enumerate() {
        let Some(col) = slot.kind.type_column() else {
            keys.push(SlotKey::Pad);
            continue;
        };
        matrix[[row, d + col]] = 1.0;
        let mut dst = matrix.slice_mut(s![row, ..d]);
        match slot.kind {
            SlotKind::Relation => {
                let id = relations.index_of(&slot.token).ok_or_else(|| {
                    Error::InvalidArgument(format!("unknown relation {:?}", slot.token))
                })?;
                dst.assign(&relations.row(id));
                keys.push(SlotKey::Relation(id));
            }
            _ => {
                if let Some(v) = table.phrase_vector(&slot.token) {
                    dst.iter_mut().zip(v).for_each(|(x, v)| *x = v);
                }
                keys.push(SlotKey::Concept(slot.token.clone()));
            }
        }
    }
    Ok(EncodedExample {
        matrix,
        label,
        slots: keys,
    })
}

/// One JSON object per line. Lines starting with `#` are header comments.
pub fn write_examples<W: Write>(examples: &[ClozeExample], mut sink: W) -> Result<()> {
    for ex in examples {
        serde_json::to_writer(&mut sink, ex)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

pub fn read_examples<R: BufRead>(source: R) -> Result<Vec<ClozeExample>> {
    let mut out = Vec::new();
    for line in source.lines() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let index = out.len();
        let ex: ClozeExample = serde_json::from_str(&line).map_err(|e| Error::Record {
            index,
            msg: e.to_string(),
        })?;
        ex.validate().map_err(|msg| Error::Record { index, msg })?;
        out.push(ex);
    }
    Ok(out)
}
