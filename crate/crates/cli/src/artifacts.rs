//! Stage artifact files and their provenance headers.
//!
//! Text artifacts start with two comment lines:
//!
//! ```text
//! # csrc <kind>
//! # config_hash=<hex> seed=<n>
//! ```
//!
//! Binary and JSON artifacts carry the same `config_hash=.. seed=..` string
//! in their own header field.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config_hash={} seed={}", self.config_hash, self.seed)
    }
}

impl Provenance {
    pub fn parse(s: &str) -> Result<Self> {
        let mut hash = None;
        let mut seed = None;
        for field in s.split_whitespace() {
            if let Some(v) = field.strip_prefix("config_hash=") {
                hash = Some(v.to_string());
            } else if let Some(v) = field.strip_prefix("seed=") {
                seed = Some(v.parse().with_context(|| format!("bad seed in header {s:?}"))?);
            }
        }
        match (hash, seed) {
            (Some(config_hash), Some(seed)) => Ok(Provenance { config_hash, seed }),
            _ => bail!("header {s:?} lacks config_hash or seed"),
        }
    }
}

/// A stage output that is absent; names the command that produces it.
#[derive(Debug)]
pub struct MissingArtifact {
    pub path: PathBuf,
    pub command: &'static str,
}

impl fmt::Display for MissingArtifact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "missing artifact {}; run `csrc {}` first",
            self.path.display(),
            self.command
        )
    }
}

impl std::error::Error for MissingArtifact {}

pub fn require(path: &Path, command: &'static str) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(anyhow!(MissingArtifact {
            path: path.to_path_buf(),
            command,
        }))
    }
}

pub fn header(kind: &str, prov: &Provenance) -> String {
    format!("# csrc {kind}\n# {prov}\n")
}

/// Write `body` under a provenance header, creating parent directories.
pub fn write_text(path: &Path, kind: &str, prov: &Provenance, body: &str) -> Result<()> {
    let mut text = header(kind, prov);
    text.push_str(body);
    write_bytes(path, text.as_bytes())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

/// Read a text artifact written by [`write_text`]. Returns the provenance and
/// the body after the header.
pub fn read_text(path: &Path, kind: &str, producer: &'static str) -> Result<(Provenance, String)> {
    require(path, producer)?;
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.splitn(3, '\n');
    let first = lines.next().unwrap_or("");
    let expect = format!("# csrc {kind}");
    if first != expect {
        bail!("{} is not a {kind} artifact (first line {first:?})", path.display());
    }
    let prov = lines
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .ok_or_else(|| anyhow!("{} has no provenance line", path.display()))?;
    let prov = Provenance::parse(prov).with_context(|| format!("in {}", path.display()))?;
    Ok((prov, lines.next().unwrap_or("").to_string()))
}

/// Non-comment, non-blank lines split on tabs.
pub fn tsv_rows(body: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    body.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i + 1, l.split('\t').collect()))
}

/// Remove files in `dir` that a stage owns, so reruns leave no stale output.
pub fn clear_stage_dir(dir: &Path, prefix: &str) -> Result<()> {
    if !dir.exists() {
        return Ok(());
    }
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let owned = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with(prefix));
        if owned && path.is_file() {
            fs::remove_file(&path).with_context(|| format!("cannot remove {}", path.display()))?;
        }
    }
    Ok(())
}
