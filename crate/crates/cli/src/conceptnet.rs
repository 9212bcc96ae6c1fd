//! ConceptNet assertion dump to edge file.
//!
//! Dump rows are tab-separated with the relation, start and end URIs in
//! columns 2-4. The weight is read from column 6 when it is numeric (5.4
//! layout) or from the `weight` key of a JSON column 5 (later layouts).

use std::io::{BufRead, Write};

use anyhow::{Context, Result};
use csrc::kb_graph::normalize;

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ConvertStats {
    pub rows: usize,
    pub kept: usize,
}

/// `/r/AtLocation` → `atlocation`; nested names join with `_`.
pub fn relation_name(uri: &str) -> Option<String> {
    let name = uri.strip_prefix("/r/")?.trim_end_matches('/');
    if name.is_empty() {
        return None;
    }
    normalize(&name.replace('/', "_")).ok()
}

/// `/c/en/ice_cream/n` → `ice_cream`; non-English concepts give `None`.
pub fn english_term(uri: &str) -> Option<String> {
    let rest = uri.strip_prefix("/c/en/")?;
    let term = rest.split('/').next()?;
    normalize(&term.replace('_', " ")).ok()
}

fn weight(fields: &[&str]) -> f64 {
    if let Some(w) = fields.get(5).and_then(|f| f.trim().parse::<f64>().ok()) {
        return w;
    }
    fields
        .get(4)
        .filter(|f| f.trim_start().starts_with('{'))
        .and_then(|f| serde_json::from_str::<serde_json::Value>(f).ok())
        .and_then(|v| v.get("weight").and_then(|w| w.as_f64()))
        .unwrap_or(1.0)
}

pub fn convert<R: BufRead, W: Write>(input: R, mut output: W) -> Result<ConvertStats> {
    let mut stats = ConvertStats::default();
    for (i, line) in input.lines().enumerate() {
        let line = line.with_context(|| format!("reading dump line {}", i + 1))?;
        if line.trim().is_empty() {
            continue;
        }
        stats.rows += 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 4 {
            continue;
        }
        let (Some(rel), Some(start), Some(end)) = (
            relation_name(fields[1]),
            english_term(fields[2]),
            english_term(fields[3]),
        ) else {
            continue;
        };
        let w = weight(&fields);
        if !(w.is_finite() && w >= 0.0) {
            continue;
        }
        writeln!(output, "{rel}\t{start}\t{end}\t{w}")?;
        stats.kept += 1;
    }
    output.flush()?;
    Ok(stats)
}
