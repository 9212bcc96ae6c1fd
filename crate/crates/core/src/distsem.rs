//! Word-vector tables and distributional relatedness between phrases.

use std::collections::HashMap;
use std::io::BufRead;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kb_graph::normalize;

#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
    pub source_tag: String,
    /// Rows skipped at load time because their arity did not match `dim`.
    pub rejected_rows: usize,
}

impl EmbeddingTable {
    pub fn new(dim: usize, source_tag: impl Into<String>) -> Self {
        EmbeddingTable {
            dim,
            entries: HashMap::new(),
            source_tag: source_tag.into(),
            rejected_rows: 0,
        }
    }

    /// Random frozen vectors for every token, used as the "no pretraining" table.
    pub fn random<I, S>(tokens: I, dim: usize, seed: u64) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut names: Vec<String> = tokens
            .into_iter()
            .filter_map(|t| normalize(t.as_ref()).ok())
            .collect();
        names.sort();
        names.dedup();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut table = EmbeddingTable::new(dim, format!("random-{dim}-seed{seed}"));
        for name in names {
            let v = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            table.entries.insert(name, v);
        }
        table
    }

    /// Insert or replace a vector; the token is normalized.
    pub fn insert(&mut self, token: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        if vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite component in vector for {token:?}"
            )));
        }
        self.entries.insert(normalize(token)?, vector);
        Ok(())
    }

    /// Parse the word2vec text format: a `<count> <dim>` header, then one
    /// `<token> <f1> ... <fdim>` row per line. Rows of the wrong arity are
    /// skipped and counted in `rejected_rows`; if every row is rejected the
    /// header is taken to be wrong and loading fails.
    pub fn load_word_vectors<R: BufRead>(source: R, expected_dim: Option<usize>) -> Result<Self> {
        let mut lines = source.lines().enumerate();
        let (header_no, header) = loop {
            match lines.next() {
                Some((i, line)) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break (i + 1, line);
                    }
                }
                None => {
                    return Err(Error::Parse {
                        line: 1,
                        msg: "missing `<count> <dim>` header".into(),
                    })
                }
            }
        };
        let nums: Vec<&str> = header.split_whitespace().collect();
        let parse_usize = |s: &str| s.parse::<usize>().ok();
        let (count, dim) = match nums.as_slice() {
            [c, d] => match (parse_usize(c), parse_usize(d)) {
                (Some(c), Some(d)) if d > 0 => (c, d),
                _ => {
                    return Err(Error::Parse {
                        line: header_no,
                        msg: format!("bad header {header:?}"),
                    })
                }
            },
            _ => {
                return Err(Error::Parse {
                    line: header_no,
                    msg: format!("bad header {header:?}"),
                })
            }
        };
        if let Some(expected) = expected_dim {
            if expected != dim {
                return Err(Error::DimMismatch {
                    expected,
                    actual: dim,
                });
            }
        }

        let mut table = EmbeddingTable::new(dim, "word2vec-text");
        let mut seen_rows = 0;
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            seen_rows += 1;
            let mut fields = line.split_whitespace();
            let token = fields.next().unwrap();
            let values: std::result::Result<Vec<f64>, _> = fields.map(str::parse::<f64>).collect();
            let values = match values {
                Ok(v) if v.len() == dim && v.iter().all(|x| x.is_finite()) => v,
                Ok(_) => {
                    table.rejected_rows += 1;
                    continue;
                }
                Err(_) => {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("non-numeric component in row for {token:?}"),
                    })
                }
            };
            let Ok(key) = normalize(token) else {
                table.rejected_rows += 1;
                continue;
            };
            // First occurrence wins when tokens collide after normalization.
            table.entries.entry(key).or_insert(values);
        }
        if seen_rows > 0 && table.rejected_rows == seen_rows {
            return Err(Error::Parse {
                line: header_no,
                msg: format!("header declares dim {dim} but no row has that arity"),
            });
        }
        if seen_rows != count {
            warn!("vector file header declares {count} rows, found {seen_rows}");
        }
        if table.rejected_rows > 0 {
            warn!("rejected {} vector rows with wrong arity", table.rejected_rows);
        }
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Tokens in sorted order.
    pub fn tokens(&self) -> Vec<&str> {
        let mut t: Vec<&str> = self.entries.keys().map(String::as_str).collect();
        t.sort_unstable();
        t
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        let key = normalize(token).ok()?;
        self.entries.get(&key).map(Vec::as_slice)
    }

    /// Mean of the in-vocabulary token vectors of a phrase. A phrase stored
    /// whole (e.g. `new_york`) is used directly; otherwise it is split on
    /// underscores. `None` when nothing is in vocabulary.
    pub fn phrase_vector(&self, phrase: &str) -> Option<Vec<f64>> {
        let key = normalize(phrase).ok()?;
        if let Some(v) = self.entries.get(&key) {
            return Some(v.clone());
        }
        let mut sum = vec![0.0; self.dim];
        let mut n = 0usize;
        for part in key.split('_').filter(|p| !p.is_empty()) {
            if let Some(v) = self.entries.get(part) {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += x;
                }
                n += 1;
            }
        }
        if n == 0 {
            return None;
        }
        let inv = 1.0 / n as f64;
        sum.iter_mut().for_each(|s| *s *= inv);
        Some(sum)
    }

    /// Cosine between phrase vectors; `None` when either side is out of
    /// vocabulary or a zero vector.
    pub fn raw_cosine(&self, a: &str, b: &str) -> Option<f64> {
        let va = self.phrase_vector(a)?;
        let vb = self.phrase_vector(b)?;
        cosine(&va, &vb)
    }

    /// Cosine relatedness clamped to `[0, 1]`; out-of-vocabulary phrases score 0.
    pub fn relatedness(&self, a: &str, b: &str) -> f64 {
        self.raw_cosine(a, b).map_or(0.0, |c| c.clamp(0.0, 1.0))
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    let denom = (na * nb).sqrt();
    if denom == 0.0 || !denom.is_finite() {
        return None;
    }
    Some(dot / denom)
}
