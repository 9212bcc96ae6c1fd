//! Command-line driver for the relation-path pipeline.
//!
//! Stages communicate through files under the configured work directory:
//!
//! | command         | reads                    | writes                          |
//! |-----------------|--------------------------|---------------------------------|
//! | `paths`         | edges, pairs             | `paths/manifest.tsv`, `paths/pair_*.tsv` |
//! | `filter`        | `paths/`, vectors        | `filtered/`                     |
//! | `build-dataset` | `filtered/`              | `dataset/{train,dev,test}.jsonl` |
//! | `train`         | `dataset/`               | `models/`                       |
//! | `evaluate`      | `dataset/`, `models/`    | `reports/`                      |
//! | `report`        | `reports/`               | stdout                          |
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for data errors.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod conceptnet;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::commands::{ModelKind, Session};
use crate::config::{Loaded, PipelineConfig};

pub const DEFAULT_CONFIG: &str = "csrc.toml";

#[derive(Debug, Parser)]
#[command(name = "csrc", version, about = "Composite relation paths over a commonsense knowledge graph")]
pub struct Cli {
    /// Pipeline config file; defaults to ./csrc.toml when present.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// File of approved path renderings, one per line.
    #[arg(long, global = true, value_name = "FILE")]
    pub keep_list: Option<PathBuf>,
    /// Path scoring strategy: target-anchored, all-pairs or consecutive.
    #[arg(long, global = true)]
    pub strategy: Option<String>,
    /// Evaluate even when inputs come from different configs.
    #[arg(long, global = true)]
    pub force: bool,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load the edge file and print its size.
    Ingest {
        /// Edge file; defaults to the configured one.
        edges: Option<PathBuf>,
    },
    /// Turn a ConceptNet assertion dump into an edge file.
    ConvertConceptnet { dump: PathBuf, out: PathBuf },
    /// Enumerate relation paths for every entity pair.
    Paths,
    /// Drop weakly related paths.
    Filter,
    /// Build cloze examples and split them.
    BuildDataset,
    /// Train one model, or all of them.
    Train {
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
    },
    /// Score trained models on the test split.
    Evaluate {
        #[arg(long, value_enum)]
        model: Vec<ModelKind>,
    },
    /// Print tables from existing evaluation reports.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelArg {
    Random,
    Unigram,
    Single,
    Forest,
    Lstm,
    All,
}

impl ModelArg {
    fn kinds(self) -> Vec<ModelKind> {
        match self {
            ModelArg::Random => vec![ModelKind::Random],
            ModelArg::Unigram => vec![ModelKind::Unigram],
            ModelArg::Single => vec![ModelKind::Single],
            ModelArg::Forest => vec![ModelKind::Forest],
            ModelArg::Lstm => vec![ModelKind::Lstm],
            ModelArg::All => ModelKind::ALL.to_vec(),
        }
    }
}

/// Bad invocation or configuration, reported with exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(e: impl fmt::Display) -> anyhow::Error {
    anyhow::Error::new(UsageError(format!("{e:#}")))
}

/// Config after command-line overrides.
pub fn load_config(cli: &Cli) -> anyhow::Result<Loaded> {
    let mut loaded = match &cli.config {
        Some(p) => Loaded::from_file(p).map_err(usage)?,
        None if Path::new(DEFAULT_CONFIG).exists() => Loaded::from_file(Path::new(DEFAULT_CONFIG)).map_err(usage)?,
        None => Loaded {
            config: PipelineConfig::default(),
            base: PathBuf::new(),
        },
    };
    let c = &mut loaded.config;
    if let Some(seed) = cli.seed {
        c.seed = seed;
    }
    if let Some(s) = &cli.strategy {
        c.strategy = s.clone();
    }
    if let Some(k) = &cli.keep_list {
        c.keep_list = Some(std::path::absolute(k).map_err(usage)?);
    }
    c.validate().map_err(usage)?;
    Ok(loaded)
}

fn run(cli: &Cli) -> anyhow::Result<String> {
    match &cli.command {
        Command::ConvertConceptnet { dump, out } => return commands::convert_conceptnet(dump, out),
        Command::Ingest { edges: Some(p) } => return commands::ingest(p),
        _ => {}
    }
    let loaded = load_config(cli)?;
    let session = Session::new(loaded, cli.force);
    match &cli.command {
        Command::Ingest { .. } => commands::ingest(&session.loaded.resolve(&session.loaded.config.edges)),
        Command::Paths => session.paths(),
        Command::Filter => session.filter(),
        Command::BuildDataset => session.build_dataset(),
        Command::Train { model } => session.train(&model.unwrap_or(ModelArg::All).kinds()),
        Command::Evaluate { model } => session.evaluate(model),
        Command::Report => session.report(),
        Command::ConvertConceptnet { .. } => unreachable!("handled above"),
    }
}

/// Parse `args`, run the command, and return the process exit code.
/// Output goes to `out`; diagnostics to `err`.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();

    match run(&cli) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                1
            } else {
                2
            }
        }
    }
}
