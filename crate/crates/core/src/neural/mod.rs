//! LSTM sequence classifier over encoded cloze examples.
//!
//! Each of the six slot rows is one time step. The default network stacks
//! three LSTM layers (450, 200, 100 units, tanh cell activation) with
//! dropout on every layer's output, then maps the last hidden state to
//! softmax probabilities over the relation vocabulary. Relation slot rows
//! come from a learned [`RelationEmbedder`]; concept rows are the frozen
//! pretrained vectors unless entity training is enabled.

mod adam;
mod lstm;

use std::collections::HashMap;
use std::io::{Read, Write};

use ndarray::{s, Array1, Array2, ArrayView1};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{EncodedExample, SlotKey, SEQ_LEN, TYPE_WIDTH};
use crate::error::{Error, Result};

pub use adam::{adam_step, AdamConfig, AdamState};
pub use lstm::{apply_dropout, DenseParams, LstmParams};

use lstm::{dense_tanh_backward, dense_tanh_forward, lstm_backward, lstm_forward, DenseTrace, LstmTrace};

/// Learned vectors for relation tokens, one row per relation in vocabulary order.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationEmbedder {
    names: Vec<String>,
    index: HashMap<String, usize>,
    pub matrix: Array2<f64>,
    pub seed: u64,
}

impl RelationEmbedder {
    pub fn new(names: Vec<String>, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("relation embedding dim must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (dim as f64).sqrt();
        let matrix = Array2::from_shape_simple_fn((names.len(), dim), || rng.gen_range(-bound..bound));
        Self::from_matrix(names, matrix, seed)
    }

    pub fn from_matrix(names: Vec<String>, matrix: Array2<f64>, seed: u64) -> Result<Self> {
        if matrix.nrows() != names.len() {
            return Err(Error::Shape(format!(
                "{} relation names for {} rows",
                names.len(),
                matrix.nrows()
            )));
        }
        let index: HashMap<String, usize> =
            names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        if index.len() != names.len() {
            return Err(Error::InvalidArgument("duplicate relation names".into()));
        }
        Ok(RelationEmbedder {
            names,
            index,
            matrix,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn row(&self, id: usize) -> ArrayView1<'_, f64> {
        self.matrix.row(id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenLayout {
    /// Every hidden layer is recurrent.
    StackedRecurrent,
    /// First hidden layer recurrent, the rest dense tanh layers on its last state.
    RecurrentThenDense,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub layout: HiddenLayout,
    pub dropout: f64,
    pub trainable_entities: bool,
}

impl ModelConfig {
    pub fn new(input_dim: usize) -> Self {
        ModelConfig {
            input_dim,
            hidden: vec![450, 200, 100],
            layout: HiddenLayout::StackedRecurrent,
            dropout: 0.5,
            trainable_entities: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.input_dim <= TYPE_WIDTH {
            return Err(Error::InvalidArgument(format!(
                "input_dim must exceed the {TYPE_WIDTH} type columns, got {}",
                self.input_dim
            )));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "hidden sizes must be nonempty and positive, got {:?}",
                self.hidden
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument(format!("dropout {} not in [0, 1)", self.dropout)));
        }
        Ok(())
    }

    fn recurrent_count(&self) -> usize {
        match self.layout {
            HiddenLayout::StackedRecurrent => self.hidden.len(),
            HiddenLayout::RecurrentThenDense => 1,
        }
    }

    pub fn embed_dim(&self) -> usize {
        self.input_dim - TYPE_WIDTH
    }
}

/// Every trainable tensor. Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub lstm: Vec<LstmParams>,
    pub dense: Vec<DenseParams>,
    pub output: DenseParams,
    pub relations: Array2<f64>,
    /// Rows for trainable concept vectors; zero rows when entities are frozen.
    pub entities: Array2<f64>,
}

impl Params {
    pub fn zeros_like(&self) -> Self {
        Params {
            lstm: self.lstm.iter().map(LstmParams::zeros_like).collect(),
            dense: self.dense.iter().map(DenseParams::zeros_like).collect(),
            output: self.output.zeros_like(),
            relations: Array2::zeros(self.relations.raw_dim()),
            entities: Array2::zeros(self.entities.raw_dim()),
        }
    }

    /// Tensors in their fixed serialization order.
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for l in &self.lstm {
            out.push(l.w.as_slice().unwrap());
            out.push(l.u.as_slice().unwrap());
            out.push(l.b.as_slice().unwrap());
        }
        for d in self.dense.iter().chain(std::iter::once(&self.output)) {
            out.push(d.w.as_slice().unwrap());
            out.push(d.b.as_slice().unwrap());
        }
        out.push(self.relations.as_slice().unwrap());
        out.push(self.entities.as_slice().unwrap());
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for l in &mut self.lstm {
            out.push(l.w.as_slice_mut().unwrap());
            out.push(l.u.as_slice_mut().unwrap());
            out.push(l.b.as_slice_mut().unwrap());
        }
        for d in self.dense.iter_mut().chain(std::iter::once(&mut self.output)) {
            out.push(d.w.as_slice_mut().unwrap());
            out.push(d.b.as_slice_mut().unwrap());
        }
        out.push(self.relations.as_slice_mut().unwrap());
        out.push(self.entities.as_slice_mut().unwrap());
        out
    }

    pub fn len(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmClassifier {
    pub config: ModelConfig,
    relation_names: Vec<String>,
    entity_names: Vec<String>,
    entity_index: HashMap<String, usize>,
    pub params: Params,
    pub seed: u64,
}

/// Fresh classifier and its relation embedder. Weights are uniform in
/// `±1/sqrt(fan_in)`, LSTM forget-gate biases start at 1.
pub fn init_model(
    relation_names: Vec<String>,
    config: ModelConfig,
    seed: u64,
) -> Result<(LstmClassifier, RelationEmbedder)> {
    config.validate()?;
    if relation_names.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 relations, got {}",
            relation_names.len()
        )));
    }
    let embedder = RelationEmbedder::new(relation_names.clone(), config.embed_dim(), seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9E37_79B9_7F4A_7C15));
    let mut uniform = |shape: (usize, usize), fan_in: usize| {
        let bound = 1.0 / (fan_in as f64).sqrt();
        Array2::from_shape_simple_fn(shape, || rng.gen_range(-bound..bound))
    };

    let mut lstm = Vec::new();
    let mut dense = Vec::new();
    let mut width = config.input_dim;
    for (layer, &h) in config.hidden.iter().enumerate() {
        if layer < config.recurrent_count() {
            let fan_in = width + h;
            let w = uniform((width, 4 * h), fan_in);
            let u = uniform((h, 4 * h), fan_in);
            let mut b = Array1::zeros(4 * h);
            b.slice_mut(s![h..2 * h]).fill(1.0);
            lstm.push(LstmParams { w, u, b });
        } else {
            dense.push(DenseParams {
                w: uniform((width, h), width),
                b: Array1::zeros(h),
            });
        }
        width = h;
    }
    let output = DenseParams {
        w: uniform((width, relation_names.len()), width),
        b: Array1::zeros(relation_names.len()),
    };
    let params = Params {
        lstm,
        dense,
        output,
        relations: embedder.matrix.clone(),
        entities: Array2::zeros((0, config.embed_dim())),
    };
    let model = LstmClassifier {
        config,
        relation_names,
        entity_names: Vec::new(),
        entity_index: HashMap::new(),
        params,
        seed,
    };
    Ok((model, embedder))
}

struct ForwardTrace {
    lstm: Vec<LstmTrace>,
    dense: Vec<DenseTrace>,
    top: Array2<f64>,
    probs: Array2<f64>,
}

impl LstmClassifier {
    pub fn relation_names(&self) -> &[String] {
        &self.relation_names
    }

    pub fn class_count(&self) -> usize {
        self.relation_names.len()
    }

    pub fn entity_names(&self) -> &[String] {
        &self.entity_names
    }

    /// Current relation vectors, for encoding new examples.
    pub fn relation_embedder(&self) -> RelationEmbedder {
        RelationEmbedder::from_matrix(self.relation_names.clone(), self.params.relations.clone(), self.seed)
            .expect("names and rows agree by construction")
    }

    /// Weights of the classifier proper, excluding embedding rows.
    pub fn classifier_param_count(&self) -> usize {
        self.params.len() - self.params.relations.len() - self.params.entities.len()
    }

    /// Make the concept vectors of `examples` trainable, starting from their
    /// encoded rows. Concepts first seen later keep their frozen rows.
    pub fn attach_entities(&mut self, examples: &[EncodedExample]) -> Result<()> {
        let d = self.config.embed_dim();
        let mut names = Vec::new();
        let mut rows: Vec<f64> = Vec::new();
        let mut index = HashMap::new();
        for ex in examples {
            self.check_shape(ex)?;
            for (t, key) in ex.slots.iter().enumerate() {
                if let SlotKey::Concept(tok) = key {
                    if !index.contains_key(tok) {
                        index.insert(tok.clone(), names.len());
                        names.push(tok.clone());
                        rows.extend(ex.matrix.slice(s![t, ..d]).iter());
                    }
                }
            }
        }
        self.params.entities = Array2::from_shape_vec((names.len(), d), rows)
            .map_err(|e| Error::Shape(e.to_string()))?;
        self.entity_names = names;
        self.entity_index = index;
        Ok(())
    }

    fn check_shape(&self, ex: &EncodedExample) -> Result<()> {
        if ex.matrix.dim() != (SEQ_LEN, self.config.input_dim) || ex.slots.len() != SEQ_LEN {
            return Err(Error::Shape(format!(
                "example is {:?} with {} slots, model expects ({SEQ_LEN}, {})",
                ex.matrix.dim(),
                ex.slots.len(),
                self.config.input_dim
            )));
        }
        for key in &ex.slots {
            if let SlotKey::Relation(id) = key {
                if *id >= self.class_count() {
                    return Err(Error::Shape(format!("relation slot id {id} out of range")));
                }
            }
        }
        Ok(())
    }

    /// Per-step input matrices with learned rows substituted.
    fn assemble(&self, batch: &[EncodedExample]) -> Result<Vec<Array2<f64>>> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let d = self.config.embed_dim();
        let mut xs = vec![Array2::zeros((batch.len(), self.config.input_dim)); SEQ_LEN];
        for (b, ex) in batch.iter().enumerate() {
            self.check_shape(ex)?;
            for (t, x) in xs.iter_mut().enumerate() {
                let mut row = x.row_mut(b);
                row.assign(&ex.matrix.row(t));
                match &ex.slots[t] {
                    SlotKey::Relation(id) => {
                        row.slice_mut(s![..d]).assign(&self.params.relations.row(*id));
                    }
                    SlotKey::Concept(tok) => {
                        if let Some(&e) = self.entity_index.get(tok) {
                            row.slice_mut(s![..d]).assign(&self.params.entities.row(e));
                        }
                    }
                    SlotKey::Pad => {}
                }
            }
        }
        Ok(xs)
    }

    fn forward_trace(&self, batch: &[EncodedExample], mode: Mode, seed: u64) -> Result<ForwardTrace> {
        let mut xs = self.assemble(batch)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rate = match mode {
            Mode::Train => self.config.dropout,
            Mode::Infer => 0.0,
        };
        let mut lstm_traces = Vec::new();
        for p in &self.params.lstm {
            let tr = lstm_forward(p, xs, Some((rate, &mut rng)));
            xs = tr.ys.clone();
            lstm_traces.push(tr);
        }
        let mut top = xs.pop().expect("sequence has steps");
        let mut dense_traces = Vec::new();
        for p in &self.params.dense {
            let tr = dense_tanh_forward(p, top, Some((rate, &mut rng)));
            top = tr.y.clone();
            dense_traces.push(tr);
        }
        let logits = self.params.output.affine(&top);
        Ok(ForwardTrace {
            lstm: lstm_traces,
            dense: dense_traces,
            top,
            probs: softmax_rows(&logits),
        })
    }

    /// Class probabilities, one row per example. In train mode dropout masks
    /// are drawn from `seed`; infer mode ignores it.
    pub fn forward(&self, batch: &[EncodedExample], mode: Mode, seed: u64) -> Result<Array2<f64>> {
        Ok(self.forward_trace(batch, mode, seed)?.probs)
    }

    /// Mean cross-entropy over the batch and its gradient for every parameter.
    pub fn loss_and_gradients(
        &self,
        batch: &[EncodedExample],
        mode: Mode,
        seed: u64,
    ) -> Result<(f64, Params)> {
        let classes = self.class_count();
        if let Some(bad) = batch.iter().find(|e| e.label >= classes) {
            return Err(Error::InvalidArgument(format!(
                "label {} out of range for {classes} classes",
                bad.label
            )));
        }
        let trace = self.forward_trace(batch, mode, seed)?;
        let n = batch.len() as f64;
        let mut loss = 0.0;
        let mut dlogits = trace.probs.clone();
        for (b, ex) in batch.iter().enumerate() {
            loss -= trace.probs[[b, ex.label]].max(f64::MIN_POSITIVE).ln();
            dlogits[[b, ex.label]] -= 1.0;
        }
        loss /= n;
        dlogits /= n;

        let mut grad = self.params.zeros_like();
        grad.output.w = trace.top.t().dot(&dlogits);
        grad.output.b = dlogits.sum_axis(ndarray::Axis(0));
        let mut dtop = dlogits.dot(&self.params.output.w.t());

        for (i, tr) in trace.dense.iter().enumerate().rev() {
            dtop = dense_tanh_backward(&self.params.dense[i], tr, &dtop, &mut grad.dense[i]);
        }

        let steps = SEQ_LEN;
        let mut dys: Vec<Array2<f64>> = (0..steps)
            .map(|_| Array2::zeros(dtop.raw_dim()))
            .collect();
        dys[steps - 1] = dtop;
        for (i, tr) in trace.lstm.iter().enumerate().rev() {
            dys = lstm_backward(&self.params.lstm[i], tr, &dys, &mut grad.lstm[i]);
        }

        let d = self.config.embed_dim();
        for (t, dx) in dys.iter().enumerate() {
            for (b, ex) in batch.iter().enumerate() {
                let src = dx.slice(s![b, ..d]);
                match &ex.slots[t] {
                    SlotKey::Relation(id) => {
                        let mut row = grad.relations.row_mut(*id);
                        row += &src;
                    }
                    SlotKey::Concept(tok) => {
                        if let Some(&e) = self.entity_index.get(tok) {
                            let mut row = grad.entities.row_mut(e);
                            row += &src;
                        }
                    }
                    SlotKey::Pad => {}
                }
            }
        }
        Ok((loss, grad))
    }

    /// Argmax class (ties to the smaller index) and the probability vector.
    pub fn predict(&self, example: &EncodedExample) -> Result<(usize, Vec<f64>)> {
        let probs = self.forward(std::slice::from_ref(example), Mode::Infer, 0)?;
        let row = probs.row(0).to_vec();
        Ok((argmax(&row), row))
    }

    pub fn predict_batch(&self, examples: &[EncodedExample]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(examples.len());
        for chunk in examples.chunks(256) {
            let probs = self.forward(chunk, Mode::Infer, 0)?;
            out.extend(probs.rows().into_iter().map(|r| argmax(r.as_slice().unwrap())));
        }
        Ok(out)
    }

    pub fn accuracy(&self, examples: &[EncodedExample]) -> Result<f64> {
        if examples.is_empty() {
            return Ok(0.0);
        }
        let preds = self.predict_batch(examples)?;
        let hits = preds.iter().zip(examples).filter(|(p, e)| **p == e.label).count();
        Ok(hits as f64 / examples.len() as f64)
    }
}

pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        row.mapv_inplace(|x| (x - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 25,
            epochs: 50,
            seed: 0,
            adam: AdamConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    /// 1-based epoch whose weights were kept.
    pub best_epoch: usize,
}

/// Minibatch Adam training with per-epoch seeded shuffling. The returned
/// model carries the weights of the epoch with the best dev accuracy
/// (earliest on ties).
pub fn train(
    mut model: LstmClassifier,
    train_set: &[EncodedExample],
    dev_set: &[EncodedExample],
    config: &TrainConfig,
) -> Result<(LstmClassifier, TrainHistory)> {
    if train_set.is_empty() || dev_set.is_empty() {
        return Err(Error::InvalidArgument("train and dev sets must be nonempty".into()));
    }
    if config.epochs == 0 || config.batch_size == 0 {
        return Err(Error::InvalidArgument(format!(
            "epochs and batch_size must be >= 1, got {} and {}",
            config.epochs, config.batch_size
        )));
    }
    if model.config.trainable_entities && model.entity_names.is_empty() {
        model.attach_entities(train_set)?;
    }

    let lens: Vec<usize> = model.params.tensors().iter().map(|t| t.len()).collect();
    let mut adam = AdamState::new(config.adam, &lens);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = TrainHistory::default();
    let mut best: Option<(f64, Params)> = None;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<EncodedExample> = chunk.iter().map(|&i| train_set[i].clone()).collect();
            let mask_seed = rng.gen::<u64>();
            let (loss, grad) = model.loss_and_gradients(&batch, Mode::Train, mask_seed)?;
            loss_sum += loss * batch.len() as f64;
            adam.step(&mut model.params.tensors_mut(), &grad.tensors())?;
        }
        let dev_accuracy = model.accuracy(dev_set)?;
        let train_loss = loss_sum / train_set.len() as f64;
        log::debug!("epoch {epoch}: loss {train_loss:.4} dev acc {dev_accuracy:.4}");
        history.epochs.push(EpochStats {
            epoch,
            train_loss,
            dev_accuracy,
        });
        if best.as_ref().is_none_or(|(acc, _)| dev_accuracy > *acc) {
            best = Some((dev_accuracy, model.params.clone()));
            history.best_epoch = epoch;
        }
    }
    if let Some((_, params)) = best {
        model.params = params;
    }
    Ok((model, history))
}

const MAGIC: &[u8; 8] = b"CSRCLSTM";
pub const FORMAT_VERSION: u32 = 1;

fn put_u32<W: Write>(w: &mut W, x: u32) -> Result<()> {
    w.write_all(&x.to_le_bytes())?;
    Ok(())
}

fn put_str<W: Write>(w: &mut W, s: &str) -> Result<()> {
    put_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes(&mut self, n: usize, what: &str) -> Result<Vec<u8>> {
        let mut buf = vec![0; n];
        self.inner
            .read_exact(&mut buf)
            .map_err(|_| Error::Format(format!("truncated model file while reading {what}")))?;
        Ok(buf)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes(8, what)?.try_into().unwrap()))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let n = self.u32(what)? as usize;
        if n > 1 << 20 {
            return Err(Error::Format(format!("implausible {what} length {n}")));
        }
        String::from_utf8(self.bytes(n, what)?).map_err(|_| Error::Format(format!("{what} is not UTF-8")))
    }
}

/// Binary container: magic, format version, provenance string, dims,
/// ordered relation and entity vocabularies, then every tensor as
/// little-endian f64 in [`Params::tensors`] order.
pub fn save_model<W: Write>(model: &LstmClassifier, provenance: &str, mut w: W) -> Result<()> {
    let c = &model.config;
    w.write_all(MAGIC)?;
    put_u32(&mut w, FORMAT_VERSION)?;
    put_str(&mut w, provenance)?;
    w.write_all(&model.seed.to_le_bytes())?;
    put_u32(&mut w, c.input_dim as u32)?;
    w.write_all(&[match c.layout {
        HiddenLayout::StackedRecurrent => 0,
        HiddenLayout::RecurrentThenDense => 1,
    }])?;
    w.write_all(&c.dropout.to_le_bytes())?;
    w.write_all(&[c.trainable_entities as u8])?;
    put_u32(&mut w, c.hidden.len() as u32)?;
    for &h in &c.hidden {
        put_u32(&mut w, h as u32)?;
    }
    put_u32(&mut w, model.relation_names.len() as u32)?;
    for n in &model.relation_names {
        put_str(&mut w, n)?;
    }
    put_u32(&mut w, model.entity_names.len() as u32)?;
    for n in &model.entity_names {
        put_str(&mut w, n)?;
    }
    let tensors = model.params.tensors();
    put_u32(&mut w, tensors.len() as u32)?;
    for t in tensors {
        w.write_all(&(t.len() as u64).to_le_bytes())?;
        for x in t {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Returns the model and the provenance string it was saved with.
pub fn load_model<R: Read>(r: R) -> Result<(LstmClassifier, String)> {
    let mut r = Reader { inner: r };
    let magic = r.bytes(MAGIC.len(), "magic")?;
    if magic != MAGIC {
        return Err(Error::Format("not an LSTM model file (bad magic)".into()));
    }
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "model format version {version}, this build reads version {FORMAT_VERSION}"
        )));
    }
    let provenance = r.string("provenance")?;
    let seed = r.u64("seed")?;
    let input_dim = r.u32("input_dim")? as usize;
    let layout = match r.bytes(1, "layout")?[0] {
        0 => HiddenLayout::StackedRecurrent,
        1 => HiddenLayout::RecurrentThenDense,
        x => return Err(Error::Format(format!("unknown layout tag {x}"))),
    };
    let dropout = r.f64("dropout")?;
    let trainable_entities = r.bytes(1, "entity flag")?[0] != 0;
    let n_hidden = r.u32("hidden count")? as usize;
    let hidden = (0..n_hidden)
        .map(|_| r.u32("hidden size").map(|h| h as usize))
        .collect::<Result<Vec<_>>>()?;
    let n_rel = r.u32("relation count")? as usize;
    let relation_names = (0..n_rel)
        .map(|_| r.string("relation name"))
        .collect::<Result<Vec<_>>>()?;
    let n_ent = r.u32("entity count")? as usize;
    let entity_names = (0..n_ent)
        .map(|_| r.string("entity name"))
        .collect::<Result<Vec<_>>>()?;

    let config = ModelConfig {
        input_dim,
        hidden,
        layout,
        dropout,
        trainable_entities,
    };
    let (mut model, _) = init_model(relation_names, config, seed)?;
    model.params.entities = Array2::zeros((n_ent, model.config.embed_dim()));
    model.entity_index = entity_names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
    model.entity_names = entity_names;

    let count = r.u32("tensor count")? as usize;
    let mut tensors = model.params.tensors_mut();
    if count != tensors.len() {
        return Err(Error::Format(format!(
            "file has {count} tensors, architecture needs {}",
            tensors.len()
        )));
    }
    for (i, t) in tensors.iter_mut().enumerate() {
        let len = r.u64("tensor length")? as usize;
        if len != t.len() {
            return Err(Error::Format(format!(
                "tensor {i} has {len} values, architecture needs {}",
                t.len()
            )));
        }
        for x in t.iter_mut() {
            *x = r.f64("tensor data")?;
        }
    }
    Ok((model, provenance))
}
