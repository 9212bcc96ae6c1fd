//! Stage implementations. Each returns the text printed on success.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use csrc::baselines::{
    predict_random, train_forest, train_single, train_unigram, BaselineModel, ForestConfig, RandomModel,
};
use csrc::dataset::{build_examples, encode, read_examples, split, write_examples, ClozeExample, EncodedExample, SlotKind};
use csrc::distsem::EmbeddingTable;
use csrc::dna_filter::{filter_paths, score_path};
use csrc::eval::{evaluate_predictions, render_confusion_table, render_metric_table, EvalReport};
use csrc::kb_graph::{normalize, KnowledgeGraph};
use csrc::neural::{self, init_model, load_model, save_model, AdamConfig, ModelConfig, RelationEmbedder, TrainConfig};
use csrc::path_search::{enumerate_paths, RelationPath};
use serde::{Deserialize, Serialize};

use crate::artifacts::{self, clear_stage_dir, read_text, require, tsv_rows, write_bytes, write_text, Provenance};
use crate::config::{Loaded, PipelineConfig};
use crate::conceptnet;

const PATHS: &str = "paths";
const FILTERED: &str = "filtered";
const DATASET: &str = "dataset";
const MODELS: &str = "models";
const REPORTS: &str = "reports";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum ModelKind {
    Random,
    Unigram,
    Single,
    Forest,
    Lstm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Random,
        ModelKind::Unigram,
        ModelKind::Single,
        ModelKind::Forest,
        ModelKind::Lstm,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ModelKind::Random => "random",
            ModelKind::Unigram => "unigram",
            ModelKind::Single => "single",
            ModelKind::Forest => "forest",
            ModelKind::Lstm => "lstm",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ModelKind::Random => "Random",
            ModelKind::Unigram => "Unigram",
            ModelKind::Single => "Single",
            ModelKind::Forest => "Random Forest",
            ModelKind::Lstm => "LSTM",
        }
    }

    fn file_name(self) -> String {
        match self {
            ModelKind::Lstm => "lstm.bin".into(),
            other => format!("{}.json", other.key()),
        }
    }
}

/// Summary line for an edge file.
pub fn ingest(edges: &Path) -> Result<String> {
    let g = load_graph(edges)?;
    Ok(format!("{g}\n"))
}

pub fn convert_conceptnet(dump: &Path, out: &Path) -> Result<String> {
    let input = File::open(dump).with_context(|| format!("cannot open dump {}", dump.display()))?;
    let mut buf = Vec::new();
    let stats = conceptnet::convert(BufReader::new(input), &mut buf)?;
    write_bytes(out, &buf)?;
    Ok(format!("kept {} of {} rows\n", stats.kept, stats.rows))
}

fn load_graph(path: &Path) -> Result<KnowledgeGraph> {
    let f = File::open(path).with_context(|| format!("cannot open edge file {}", path.display()))?;
    KnowledgeGraph::load_edges(BufReader::new(f)).with_context(|| format!("in edge file {}", path.display()))
}

/// One pipeline invocation: resolved config plus the provenance stamped on
/// every artifact it writes.
pub struct Session {
    pub loaded: Loaded,
    pub prov: Provenance,
    pub force: bool,
}

#[derive(Debug, Clone)]
struct PairRow {
    index: usize,
    e1: String,
    e2: String,
    status: String,
}

impl Session {
    pub fn new(loaded: Loaded, force: bool) -> Self {
        let prov = Provenance {
            config_hash: loaded.config.hash(),
            seed: loaded.config.seed,
        };
        Session { loaded, prov, force }
    }

    fn cfg(&self) -> &PipelineConfig {
        &self.loaded.config
    }

    fn work(&self, rel: &str) -> PathBuf {
        self.loaded.workdir().join(rel)
    }

    fn graph(&self) -> Result<KnowledgeGraph> {
        load_graph(&self.loaded.resolve(&self.cfg().edges))
    }

    fn vectors(&self) -> Result<EmbeddingTable> {
        let path = self.loaded.resolve(&self.cfg().vectors);
        let f = File::open(&path).with_context(|| format!("cannot open vector file {}", path.display()))?;
        EmbeddingTable::load_word_vectors(BufReader::new(f), None)
            .with_context(|| format!("in vector file {}", path.display()))
    }

    fn note_upstream(&self, what: &Path, prov: &Provenance) {
        if *prov != self.prov {
            log::warn!("{} was produced under {prov}, current run is {}", what.display(), self.prov);
        }
    }

    fn read_stage(&self, rel: &str, kind: &str, producer: &'static str) -> Result<String> {
        let path = self.work(rel);
        let (prov, body) = read_text(&path, kind, producer)?;
        self.note_upstream(&path, &prov);
        Ok(body)
    }

    fn read_manifest(&self, dir: &str, producer: &'static str) -> Result<Vec<PairRow>> {
        let body = self.read_stage(&format!("{dir}/manifest.tsv"), &format!("{dir} manifest"), producer)?;
        tsv_rows(&body)
            .map(|(line, f)| {
                if f.len() < 4 {
                    bail!("{dir}/manifest.tsv line {line}: expected at least 4 columns");
                }
                Ok(PairRow {
                    index: f[0].parse().with_context(|| format!("{dir}/manifest.tsv line {line}"))?,
                    e1: f[1].to_string(),
                    e2: f[2].to_string(),
                    status: f[3].to_string(),
                })
            })
            .collect()
    }

    fn read_pair_paths(&self, g: &KnowledgeGraph, dir: &str, index: usize, producer: &'static str) -> Result<Vec<(RelationPath, Vec<String>)>> {
        let rel = format!("{dir}/{}", pair_file(index));
        let body = self.read_stage(&rel, dir, producer)?;
        tsv_rows(&body)
            .map(|(line, f)| {
                if f.len() < 2 {
                    bail!("{rel} line {line}: expected path and directions");
                }
                let path = RelationPath::parse(g, f[0], f[1]).with_context(|| format!("{rel} line {line}"))?;
                Ok((path, f.iter().map(|s| s.to_string()).collect()))
            })
            .collect()
    }

    pub fn paths(&self) -> Result<String> {
        let g = self.graph()?;
        let pairs_path = self.loaded.resolve(&self.cfg().pairs);
        let text = fs::read_to_string(&pairs_path)
            .with_context(|| format!("cannot read pairs file {}", pairs_path.display()))?;
        let limits = self.cfg().search_limits();
        let dir = self.work(PATHS);
        clear_stage_dir(&dir, "pair_")?;

        let mut manifest = String::from("# index\te1\te2\tstatus\tpaths\ttruncated\n");
        let (mut resolved, mut skipped, mut total) = (0, 0, 0);
        for (index, (line, fields)) in tsv_rows(&text).enumerate() {
            let (a, b) = match fields.as_slice() {
                [a, b] => (a.to_string(), b.to_string()),
                [one] => match one.split_whitespace().collect::<Vec<_>>().as_slice() {
                    [a, b] => (a.to_string(), b.to_string()),
                    _ => bail!("{} line {line}: expected two concepts", pairs_path.display()),
                },
                _ => bail!("{} line {line}: expected two tab-separated concepts", pairs_path.display()),
            };
            let lookup = |s: &str| normalize(s).ok().and_then(|n| g.concept(&n).map(|id| (n, id)));
            let (e1, e2) = match (lookup(&a), lookup(&b)) {
                (Some(x), Some(y)) if x.1 != y.1 => (x, y),
                (Some(_), Some(_)) => {
                    skip(&mut manifest, index, &a, &b, "identical endpoints");
                    skipped += 1;
                    continue;
                }
                (x, _) => {
                    let missing = if x.is_none() { &a } else { &b };
                    skip(&mut manifest, index, &a, &b, &format!("unknown concept {}", missing.trim()));
                    skipped += 1;
                    continue;
                }
            };
            let found = enumerate_paths(&g, e1.1, e2.1, &limits)?;
            let mut body = format!("# pair\t{}\t{}\n", e1.0, e2.0);
            for p in &found.paths {
                let _ = writeln!(body, "{}\t{}", p.render(&g), p.render_directions());
            }
            write_text(&dir.join(pair_file(index)), PATHS, &self.prov, &body)?;
            let _ = writeln!(
                manifest,
                "{index}\t{}\t{}\tok\t{}\t{}",
                e1.0,
                e2.0,
                found.paths.len(),
                found.truncated
            );
            resolved += 1;
            total += found.paths.len();
        }
        write_text(&dir.join("manifest.tsv"), "paths manifest", &self.prov, &manifest)?;
        Ok(format!(
            "{} pairs: {resolved} resolved, {skipped} skipped, {total} paths\n",
            resolved + skipped
        ))
    }

    pub fn filter(&self) -> Result<String> {
        let rows = self.read_manifest(PATHS, "paths")?;
        let g = self.graph()?;
        let table = self.vectors()?;
        let strategy = self.cfg().scoring_strategy()?;
        let keep = match &self.cfg().keep_list {
            Some(p) => Some(read_keep_list(&self.loaded.resolve(p))?),
            None => None,
        };
        let dir = self.work(FILTERED);
        clear_stage_dir(&dir, "pair_")?;

        let mut manifest = String::from("# index\te1\te2\tstatus\tbefore\tafter\tmsq\n");
        let (mut before, mut after) = (0, 0);
        for row in rows {
            if row.status != "ok" {
                let _ = writeln!(manifest, "{}\t{}\t{}\t{}\t0\t0\t0", row.index, row.e1, row.e2, row.status);
                continue;
            }
            let paths = self.read_pair_paths(&g, PATHS, row.index, "paths")?;
            let n = paths.len();
            let scored = paths.iter().map(|(p, _)| score_path(&table, &g, p, strategy)).collect();
            let outcome = filter_paths(scored)?;
            let mut body = format!("# pair\t{}\t{}\tthreshold\t{}\n", row.e1, row.e2, outcome.threshold);
            let mut kept = 0;
            for s in &outcome.kept {
                let rendered = s.path.render(&g);
                if keep.as_ref().is_some_and(|k| !k.contains(&rendered)) {
                    continue;
                }
                let _ = writeln!(body, "{rendered}\t{}\t{}", s.path.render_directions(), s.sq);
                kept += 1;
            }
            write_text(&dir.join(pair_file(row.index)), FILTERED, &self.prov, &body)?;
            let _ = writeln!(manifest, "{}\t{}\t{}\tok\t{n}\t{kept}\t{}", row.index, row.e1, row.e2, outcome.msq);
            before += n;
            after += kept;
        }
        write_text(&dir.join("manifest.tsv"), "filtered manifest", &self.prov, &manifest)?;
        Ok(format!("{before} paths before filtering, {after} after ({strategy})\n"))
    }

    pub fn build_dataset(&self) -> Result<String> {
        let rows = self.read_manifest(FILTERED, "filter")?;
        let g = self.graph()?;
        let mut paths = Vec::new();
        for row in rows.iter().filter(|r| r.status == "ok") {
            paths.extend(self.read_pair_paths(&g, FILTERED, row.index, "filter")?.into_iter().map(|(p, _)| p));
        }
        let examples = build_examples(&g, &paths)?;
        let n = examples.len();
        let parts = split(examples, self.cfg().test_fraction, self.cfg().dev_fraction, self.cfg().seed)
            .with_context(|| format!("splitting {n} examples from {} paths", paths.len()))?;

        let dir = self.work(DATASET);
        for (name, part) in [("train", &parts.train), ("dev", &parts.dev), ("test", &parts.test)] {
            let mut buf = Vec::new();
            write_examples(part, &mut buf)?;
            write_text(&dir.join(format!("{name}.jsonl")), "examples", &self.prov, std::str::from_utf8(&buf)?)?;
        }
        let vocab: String = g.relation_names().iter().map(|r| format!("{r}\n")).collect();
        write_text(&dir.join("relations.txt"), "relations", &self.prov, &vocab)?;
        let stats = dataset_stats(g.relation_names(), [&parts.train, &parts.dev, &parts.test]);
        write_text(&dir.join("stats.tsv"), "dataset stats", &self.prov, &stats)?;
        Ok(format!(
            "{n} examples from {} paths: train {}, dev {}, test {}\n",
            paths.len(),
            parts.train.len(),
            parts.dev.len(),
            parts.test.len()
        ))
    }

    fn read_examples_file(&self, name: &str) -> Result<(Provenance, Vec<ClozeExample>)> {
        let path = self.work(&format!("{DATASET}/{name}.jsonl"));
        let (prov, body) = read_text(&path, "examples", "build-dataset")?;
        let examples = read_examples(body.as_bytes()).with_context(|| format!("in {}", path.display()))?;
        Ok((prov, examples))
    }

    fn dataset(&self) -> Result<Dataset> {
        let vocab_body = self.read_stage(&format!("{DATASET}/relations.txt"), "relations", "build-dataset")?;
        let vocab: Vec<String> = tsv_rows(&vocab_body).map(|(_, f)| f[0].to_string()).collect();
        let (prov, train) = self.read_examples_file("train")?;
        self.note_upstream(&self.work(DATASET), &prov);
        let (_, dev) = self.read_examples_file("dev")?;
        let (_, test) = self.read_examples_file("test")?;
        Ok(Dataset {
            vocab,
            train,
            dev,
            test,
            prov,
        })
    }

    /// Entity vectors: the configured vector file, or random frozen rows of
    /// the same width keyed by `seed`.
    fn entity_table(&self, data: &Dataset, seed: u64) -> Result<EmbeddingTable> {
        let vectors = self.vectors()?;
        if self.cfg().pretrained {
            return Ok(vectors);
        }
        let tokens: BTreeSet<&str> = data
            .all()
            .flat_map(|e| e.inputs())
            .filter(|s| s.kind != SlotKind::Relation)
            .map(|s| s.token.as_str())
            .collect();
        Ok(EmbeddingTable::random(tokens, vectors.dim(), seed))
    }

    pub fn train(&self, kinds: &[ModelKind]) -> Result<String> {
        let data = self.dataset()?;
        let cfg = self.cfg();
        let seed = cfg.seed;
        let provenance = self.prov.to_string();
        let dir = self.work(MODELS);
        let mut out = String::new();
        for &kind in kinds {
            let path = dir.join(kind.file_name());
            let model = match kind {
                ModelKind::Random => BaselineModel::Random(RandomModel {
                    vocab: data.vocab.clone(),
                    seed,
                }),
                ModelKind::Unigram => BaselineModel::Unigram(train_unigram(&data.train, &data.vocab)?),
                ModelKind::Single => BaselineModel::Single(train_single(&data.train, &data.vocab)?),
                ModelKind::Forest => {
                    let table = self.entity_table(&data, seed)?;
                    let embedder = RelationEmbedder::new(data.vocab.clone(), table.dim(), seed)?;
                    let encoded = encode_all(&data.train, &table, &embedder)?;
                    let fc = ForestConfig {
                        n_trees: cfg.forest_trees,
                        max_depth: cfg.forest_max_depth,
                        ..ForestConfig::default()
                    };
                    BaselineModel::Forest(train_forest(&encoded, &data.vocab, &fc, seed)?)
                }
                ModelKind::Lstm => {
                    let table = self.entity_table(&data, seed)?;
                    let mc = ModelConfig {
                        input_dim: table.dim() + csrc::dataset::TYPE_WIDTH,
                        hidden: cfg.hidden.clone(),
                        layout: cfg.hidden_layout()?,
                        dropout: cfg.dropout,
                        trainable_entities: cfg.trainable_entities,
                    };
                    let (model, embedder) = init_model(data.vocab.clone(), mc, seed)?;
                    let train_set = encode_all(&data.train, &table, &embedder)?;
                    let dev_set = encode_all(&data.dev, &table, &embedder)?;
                    let tc = TrainConfig {
                        batch_size: cfg.batch_size,
                        epochs: cfg.epochs,
                        seed,
                        adam: AdamConfig {
                            learning_rate: cfg.learning_rate,
                            ..AdamConfig::default()
                        },
                    };
                    let (model, history) = neural::train(model, &train_set, &dev_set, &tc)?;
                    let mut bytes = Vec::new();
                    save_model(&model, &provenance, &mut bytes)?;
                    write_bytes(&path, &bytes)?;
                    let mut log = String::from("# epoch\ttrain_loss\tdev_accuracy\n");
                    for e in &history.epochs {
                        let _ = writeln!(log, "{}\t{}\t{}", e.epoch, e.train_loss, e.dev_accuracy);
                    }
                    let _ = writeln!(log, "# best_epoch\t{}", history.best_epoch);
                    write_text(&dir.join("lstm_history.tsv"), "training history", &self.prov, &log)?;
                    let best = &history.epochs[history.best_epoch - 1];
                    let _ = writeln!(
                        out,
                        "lstm: best epoch {} of {}, dev accuracy {:.4}",
                        history.best_epoch,
                        history.epochs.len(),
                        best.dev_accuracy
                    );
                    continue;
                }
            };
            write_bytes(&path, model.to_json(&provenance)?.as_bytes())?;
            let _ = writeln!(out, "{}: wrote {MODELS}/{}", kind.key(), kind.file_name());
        }
        Ok(out)
    }

    pub fn evaluate(&self, requested: &[ModelKind]) -> Result<String> {
        let data = self.dataset()?;
        let models_dir = self.work(MODELS);
        let kinds: Vec<ModelKind> = if requested.is_empty() {
            ModelKind::ALL
                .into_iter()
                .filter(|k| models_dir.join(k.file_name()).exists())
                .collect()
        } else {
            requested.to_vec()
        };
        if kinds.is_empty() {
            require(&models_dir.join("*"), "train")?;
        }

        let mut loaded = Vec::new();
        for &kind in &kinds {
            let path = models_dir.join(kind.file_name());
            require(&path, "train")?;
            let (model, prov) = match kind {
                ModelKind::Lstm => {
                    let f = File::open(&path)?;
                    let (m, p) = load_model(BufReader::new(f)).with_context(|| format!("in {}", path.display()))?;
                    (Loadable::Lstm(Box::new(m)), p)
                }
                _ => {
                    let text = fs::read_to_string(&path)?;
                    let (m, p) = BaselineModel::from_json(&text).with_context(|| format!("in {}", path.display()))?;
                    (Loadable::Baseline(m), p)
                }
            };
            let prov = Provenance::parse(&prov).with_context(|| format!("in {}", path.display()))?;
            loaded.push((kind, model, prov));
        }

        let mut hashes: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        hashes.entry(&self.prov.config_hash).or_default().push("current config".into());
        hashes.entry(&data.prov.config_hash).or_default().push("dataset".into());
        for (kind, _, prov) in &loaded {
            hashes.entry(&prov.config_hash).or_default().push(format!("{} model", kind.key()));
        }
        if hashes.len() > 1 {
            let detail: Vec<String> = hashes.iter().map(|(h, who)| format!("{} ({})", &h[..h.len().min(12)], who.join(", "))).collect();
            if !self.force {
                bail!("inputs come from different configs: {}; rerun the stale stages or pass --force", detail.join("; "));
            }
            log::warn!("evaluating mixed-config inputs: {}", detail.join("; "));
        }

        let gold: Vec<usize> = data
            .test
            .iter()
            .map(|e| {
                data.vocab
                    .iter()
                    .position(|v| *v == e.target)
                    .ok_or_else(|| anyhow!("test relation {:?} not in vocabulary", e.target))
            })
            .collect::<Result<_>>()?;

        let reports_dir = self.work(REPORTS);
        let mut rows = Vec::new();
        for (kind, model, prov) in loaded {
            let predicted = match &model {
                Loadable::Baseline(BaselineModel::Random(m)) => predict_random(m.vocab.len(), m.seed, data.test.len())?,
                Loadable::Baseline(BaselineModel::Unigram(m)) => vec![m.predict(); data.test.len()],
                Loadable::Baseline(BaselineModel::Single(m)) => {
                    data.test.iter().map(|e| m.predict(e)).collect::<csrc::Result<_>>()?
                }
                Loadable::Baseline(BaselineModel::Forest(m)) => {
                    let table = self.entity_table(&data, prov.seed)?;
                    let embedder = RelationEmbedder::new(m.vocab.clone(), table.dim(), m.seed)?;
                    encode_all(&data.test, &table, &embedder)?.iter().map(|e| m.predict(e)).collect()
                }
                Loadable::Lstm(m) => {
                    let table = self.entity_table(&data, prov.seed)?;
                    let encoded = encode_all(&data.test, &table, &m.relation_embedder())?;
                    m.predict_batch(&encoded)?
                }
            };
            let model_vocab = match &model {
                Loadable::Baseline(b) => b.vocab(),
                Loadable::Lstm(m) => m.relation_names(),
            };
            if model_vocab != data.vocab.as_slice() {
                bail!("{} model was trained on a different relation vocabulary", kind.key());
            }
            let (report, cm) = evaluate_predictions(&data.vocab, &gold, &predicted)?;
            let doc = ReportDocument {
                header: self.prov.to_string(),
                method: kind.title().into(),
                model: kind.key().into(),
                labels: cm.labels.clone(),
                confusion: cm.counts.clone(),
                report: report.clone(),
            };
            let mut json = serde_json::to_string_pretty(&doc)?;
            json.push('\n');
            write_bytes(&reports_dir.join(format!("{}.json", kind.key())), json.as_bytes())?;
            write_text(
                &reports_dir.join(format!("{}_relations.tsv", kind.key())),
                "relation report",
                &self.prov,
                &render_confusion_table(&report),
            )?;
            rows.push((kind.title().to_string(), report));
        }
        let table = render_metric_table(&rows);
        write_text(&reports_dir.join("metrics.txt"), "metrics", &self.prov, &table)?;
        Ok(table)
    }

    pub fn report(&self) -> Result<String> {
        let dir = self.work(REPORTS);
        let mut docs = Vec::new();
        for kind in ModelKind::ALL {
            let path = dir.join(format!("{}.json", kind.key()));
            if path.exists() {
                let text = fs::read_to_string(&path)?;
                let doc: ReportDocument =
                    serde_json::from_str(&text).with_context(|| format!("in {}", path.display()))?;
                docs.push(doc);
            }
        }
        if docs.is_empty() {
            require(&dir.join("metrics.txt"), "evaluate")?;
            bail!("no per-model reports under {}; run `csrc evaluate` first", dir.display());
        }
        let mut out = String::new();
        if let Ok(stats) = self.read_stage(&format!("{DATASET}/stats.tsv"), "dataset stats", "build-dataset") {
            let _ = writeln!(out, "Dataset\n{stats}");
        }
        let rows: Vec<(String, EvalReport)> = docs.iter().map(|d| (d.method.clone(), d.report.clone())).collect();
        let _ = writeln!(out, "Metrics\n{}", render_metric_table(&rows));
        for d in &docs {
            let _ = writeln!(out, "{} by relation\n{}", d.method, render_confusion_table(&d.report));
        }
        Ok(out)
    }
}

fn skip(manifest: &mut String, index: usize, a: &str, b: &str, reason: &str) {
    let clean = |s: &str| s.replace(['\t', '\n'], " ").trim().to_string();
    log::warn!("skipping pair {index} ({} , {}): {reason}", clean(a), clean(b));
    let _ = writeln!(manifest, "{index}\t{}\t{}\tskipped: {}\t0\tfalse", clean(a), clean(b), clean(reason));
}

fn pair_file(index: usize) -> String {
    format!("pair_{index:05}.tsv")
}

fn read_keep_list(path: &Path) -> Result<BTreeSet<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read keep list {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').next().unwrap_or(l).to_string())
        .collect())
}

fn dataset_stats(vocab: &[String], parts: [&Vec<ClozeExample>; 3]) -> String {
    let mut out = String::from("# relation\ttrain\tdev\ttest\n");
    let count = |part: &Vec<ClozeExample>, r: &str| part.iter().filter(|e| e.target == r).count();
    for r in vocab {
        let c: Vec<usize> = parts.iter().map(|p| count(p, r)).collect();
        if c.iter().any(|&x| x > 0) {
            let _ = writeln!(out, "{r}\t{}\t{}\t{}", c[0], c[1], c[2]);
        }
    }
    let _ = writeln!(out, "total\t{}\t{}\t{}", parts[0].len(), parts[1].len(), parts[2].len());
    out
}

fn encode_all(examples: &[ClozeExample], table: &EmbeddingTable, embedder: &RelationEmbedder) -> Result<Vec<EncodedExample>> {
    Ok(examples
        .iter()
        .map(|e| encode(e, table, embedder))
        .collect::<csrc::Result<_>>()?)
}

struct Dataset {
    vocab: Vec<String>,
    train: Vec<ClozeExample>,
    dev: Vec<ClozeExample>,
    test: Vec<ClozeExample>,
    prov: Provenance,
}

impl Dataset {
    fn all(&self) -> impl Iterator<Item = &ClozeExample> {
        self.train.iter().chain(&self.dev).chain(&self.test)
    }
}

enum Loadable {
    Baseline(BaselineModel),
    Lstm(Box<neural::LstmClassifier>),
}

/// Per-model evaluation output; `header` carries the provenance string.
#[derive(Debug, Serialize, Deserialize)]
pub struct ReportDocument {
    pub header: String,
    pub method: String,
    pub model: String,
    pub labels: Vec<String>,
    pub confusion: Vec<Vec<u64>>,
    pub report: EvalReport,
}

pub use artifacts::MissingArtifact;
