//! Pipeline configuration file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use csrc::dna_filter::ScoringStrategy;
use csrc::neural::HiddenLayout;
use csrc::path_search::{DirectionMode, SearchLimits};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Flat key-value settings for every stage. Relative paths are resolved
/// against the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub edges: PathBuf,
    pub vectors: PathBuf,
    pub pairs: PathBuf,
    pub workdir: PathBuf,
    pub keep_list: Option<PathBuf>,
    pub seed: u64,

    pub max_len: usize,
    /// Per-pair cap on enumerated paths; absent means unlimited.
    pub max_paths: Option<usize>,
    pub directed: bool,
    pub strategy: String,

    pub test_fraction: f64,
    pub dev_fraction: f64,

    /// Use the vector file for entity rows; `false` substitutes random frozen vectors.
    pub pretrained: bool,
    pub hidden: Vec<usize>,
    /// `stacked` (recurrent layers only) or `dense-head` (one recurrent layer, then tanh layers).
    pub layout: String,
    pub dropout: f64,
    pub trainable_entities: bool,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,

    pub forest_trees: usize,
    pub forest_max_depth: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            edges: "edges.tsv".into(),
            vectors: "vectors.txt".into(),
            pairs: "pairs.tsv".into(),
            workdir: "work".into(),
            keep_list: None,
            seed: 0,
            max_len: 3,
            max_paths: None,
            directed: false,
            strategy: ScoringStrategy::default().to_string(),
            test_fraction: 0.25,
            dev_fraction: 0.25,
            pretrained: true,
            hidden: vec![450, 200, 100],
            layout: "stacked".into(),
            dropout: 0.5,
            trainable_entities: false,
            epochs: 50,
            batch_size: 25,
            learning_rate: 1e-3,
            forest_trees: 100,
            forest_max_depth: None,
        }
    }
}

/// A parsed config plus the directory its relative paths hang off.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: PipelineConfig,
    pub base: PathBuf,
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: PipelineConfig = toml::from_str(text).context("invalid config file")?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.scoring_strategy()?;
        self.hidden_layout()?;
        self.search_limits().validate()?;
        for (name, f) in [("test_fraction", self.test_fraction), ("dev_fraction", self.dev_fraction)] {
            if !(f > 0.0 && f < 1.0) {
                bail!("{name} must be in (0, 1), got {f}");
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            bail!("dropout must be in [0, 1), got {}", self.dropout);
        }
        if self.epochs == 0 || self.batch_size == 0 || self.forest_trees == 0 {
            bail!("epochs, batch_size and forest_trees must be >= 1");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            bail!("hidden sizes must be nonempty and positive");
        }
        Ok(())
    }

    pub fn scoring_strategy(&self) -> Result<ScoringStrategy> {
        self.strategy.parse().map_err(|e: csrc::Error| anyhow::anyhow!(e))
    }

    pub fn hidden_layout(&self) -> Result<HiddenLayout> {
        match self.layout.as_str() {
            "stacked" => Ok(HiddenLayout::StackedRecurrent),
            "dense-head" => Ok(HiddenLayout::RecurrentThenDense),
            other => bail!("unknown layout {other:?}; expected stacked or dense-head"),
        }
    }

    pub fn search_limits(&self) -> SearchLimits {
        SearchLimits {
            max_paths: self.max_paths,
            direction_mode: if self.directed {
                DirectionMode::Directed
            } else {
                DirectionMode::Undirected
            },
            ..SearchLimits::with_max_len(self.max_len)
        }
    }

    /// SHA-256 of the canonical JSON form, hex encoded. Paths enter the hash
    /// as written, so moving a project directory keeps its hash.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

impl Loaded {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        let config = PipelineConfig::parse(&text).with_context(|| format!("in {}", path.display()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Loaded { config, base })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn workdir(&self) -> PathBuf {
        self.resolve(&self.config.workdir)
    }
}
