//! Composite semantic relation classification.
//!
//! The pipeline looks up every bounded-length relation path between two
//! concepts of a commonsense knowledge graph, drops paths whose intermediate
//! concepts are distributionally unrelated to the target, turns the survivors
//! into fixed-length cloze examples, and trains sequence classifiers that
//! predict the held-out relation.
//!
//! Stages, in pipeline order:
//!
//! - [`kb_graph`]: edge-file loading, concept/relation interning, adjacency.
//! - [`path_search`]: simple-path enumeration up to three relations.
//! - [`distsem`]: word-vector tables and phrase relatedness.
//! - [`dna_filter`]: path coherence scores and the half-of-max filter.
//! - [`dataset`]: cloze examples, grouped splits, matrix encoding.
//! - [`baselines`]: random, unigram, conditional "single" and random-forest predictors.
//! - [`neural`]: the stacked LSTM classifier with its own backprop and Adam.
//! - [`eval`]: confusion matrices and macro-averaged reports.

pub mod baselines;
pub mod dataset;
pub mod distsem;
pub mod dna_filter;
pub mod error;
pub mod eval;
pub mod kb_graph;
pub mod neural;
pub mod path_search;

pub use error::{Error, Result};
