//! Distributional coherence scoring of relation paths and the pair-local
//! half-of-maximum filter that discards incoherent paths.

use std::fmt;
use std::str::FromStr;

use crate::distsem::EmbeddingTable;
use crate::error::{Error, Result};
use crate::kb_graph::KnowledgeGraph;
use crate::path_search::RelationPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ScoringStrategy {
    /// Mean relatedness of each intermediate concept to the target.
    #[default]
    TargetAnchored,
    /// Mean over every unordered pair of concepts on the path.
    AllPairs,
    /// Mean over adjacent concept pairs.
    Consecutive,
}

impl fmt::Display for ScoringStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoringStrategy::TargetAnchored => "target-anchored",
            ScoringStrategy::AllPairs => "all-pairs",
            ScoringStrategy::Consecutive => "consecutive",
        })
    }
}

impl FromStr for ScoringStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "target-anchored" | "targetanchored" | "target" => Ok(ScoringStrategy::TargetAnchored),
            "all-pairs" | "allpairs" => Ok(ScoringStrategy::AllPairs),
            "consecutive" => Ok(ScoringStrategy::Consecutive),
            other => Err(Error::InvalidArgument(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPath {
    pub path: RelationPath,
    pub sq: f64,
    pub strategy: ScoringStrategy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub kept: Vec<ScoredPath>,
    pub dropped: Vec<ScoredPath>,
    pub msq: f64,
    pub threshold: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Coherence of a single path under `strategy`. Paths with no intermediate
/// concept fall back to the relatedness of their two endpoints when scored
/// target-anchored.
pub fn score_path(
    table: &EmbeddingTable,
    g: &KnowledgeGraph,
    path: &RelationPath,
    strategy: ScoringStrategy,
) -> ScoredPath {
    let name = |i: usize| g.concept_name(path.concepts[i]);
    let rel = |a: usize, b: usize| table.relatedness(name(a), name(b));
    let last = path.concepts.len() - 1;
    let sq = match strategy {
        ScoringStrategy::TargetAnchored if last <= 1 => rel(0, last),
        ScoringStrategy::TargetAnchored => mean((1..last).map(|i| rel(i, last))),
        ScoringStrategy::AllPairs => mean(
            (0..=last).flat_map(|i| (i + 1..=last).map(move |j| (i, j)))
                .map(|(i, j)| rel(i, j)),
        ),
        ScoringStrategy::Consecutive => mean((0..last).map(|i| rel(i, i + 1))),
    };
    ScoredPath {
        path: path.clone(),
        sq,
        strategy,
    }
}

/// Keep every candidate with `sq >= msq / 2`, where `msq` is the best score
/// among the candidates. All candidates must share one strategy.
pub fn filter_paths(candidates: Vec<ScoredPath>) -> Result<FilterOutcome> {
    if let Some(first) = candidates.first() {
        if let Some(odd) = candidates.iter().find(|c| c.strategy != first.strategy) {
            return Err(Error::InvalidArgument(format!(
                "mixed scoring strategies: {} and {}",
                first.strategy, odd.strategy
            )));
        }
    }
    if let Some(bad) = candidates.iter().find(|c| !c.sq.is_finite() || c.sq < 0.0) {
        return Err(Error::InvalidArgument(format!("score {} out of range", bad.sq)));
    }
    let msq = candidates.iter().map(|c| c.sq).fold(0.0, f64::max);
    let threshold = msq - msq / 2.0;
    let (kept, dropped) = candidates.into_iter().partition(|c| c.sq >= threshold);
    Ok(FilterOutcome {
        kept,
        dropped,
        msq,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb_graph::{ConceptId, Direction, RelationTypeId};
    use proptest::prelude::*;

    fn scored(sq: f64) -> ScoredPath {
        ScoredPath {
            path: RelationPath {
                concepts: vec![ConceptId(0), ConceptId(1)],
                relations: vec![RelationTypeId(0)],
                directions: vec![Direction::Forward],
            },
            sq,
            strategy: ScoringStrategy::TargetAnchored,
        }
    }

    fn sqs(v: &[ScoredPath]) -> Vec<f64> {
        v.iter().map(|s| s.sq).collect()
    }

    /// Graph over the child/cradle example plus a table whose relatedness
    /// values to `cradle` are chosen exactly: baby 0.6, run 0.1, rest 0.5,
    /// child 0.4.
    fn fixture() -> (KnowledgeGraph, EmbeddingTable) {
        let g = KnowledgeGraph::load_edges(
            "canbe\tchild\tbaby\natlocation\tbaby\tcradle\nisa\tchild\tcradle\n\
             desireof\tchild\trun\ncausesdesire\trun\trest\nsynonym\trest\tcradle\n"
                .as_bytes(),
        )
        .unwrap();
        let mut t = EmbeddingTable::new(2, "fixture");
        let unit = |c: f64| vec![c, (1.0 - c * c).sqrt()];
        t.insert("cradle", vec![1.0, 0.0]).unwrap();
        t.insert("baby", unit(0.6)).unwrap();
        t.insert("run", unit(0.1)).unwrap();
        t.insert("rest", unit(0.5)).unwrap();
        t.insert("child", unit(0.4)).unwrap();
        (g, t)
    }

    fn path(g: &KnowledgeGraph, rendered: &str) -> RelationPath {
        let k = rendered.split('/').count() / 2;
        RelationPath::parse(g, rendered, &vec!["f"; k].join(",")).unwrap()
    }

    #[test]
    fn target_anchored_examples() {
        let (g, t) = fixture();
        let direct = score_path(&t, &g, &path(&g, "child/isa/cradle"), ScoringStrategy::TargetAnchored);
        assert!((direct.sq - 0.4).abs() < 1e-12);

        let p = path(&g, "child/canbe/baby/atlocation/cradle");
        let s = score_path(&t, &g, &p, ScoringStrategy::TargetAnchored);
        assert!((s.sq - t.relatedness("baby", "cradle")).abs() < 1e-15);
        assert!((s.sq - 0.6).abs() < 1e-12);

        let p = path(&g, "child/desireof/run/causesdesire/rest/synonym/cradle");
        let s = score_path(&t, &g, &p, ScoringStrategy::TargetAnchored);
        let brute = (t.relatedness("run", "cradle") + t.relatedness("rest", "cradle")) / 2.0;
        assert!((s.sq - brute).abs() < 1e-15);
        assert!((s.sq - 0.3).abs() < 1e-12);
    }

    #[test]
    fn other_strategies() {
        let (g, t) = fixture();
        let p = path(&g, "child/canbe/baby/atlocation/cradle");
        let r = |a, b| t.relatedness(a, b);
        let all = score_path(&t, &g, &p, ScoringStrategy::AllPairs);
        let expect_all = (r("child", "baby") + r("child", "cradle") + r("baby", "cradle")) / 3.0;
        assert!((all.sq - expect_all).abs() < 1e-12);
        let cons = score_path(&t, &g, &p, ScoringStrategy::Consecutive);
        let expect_cons = (r("child", "baby") + r("baby", "cradle")) / 2.0;
        assert!((cons.sq - expect_cons).abs() < 1e-12);
        assert_eq!(cons.strategy, ScoringStrategy::Consecutive);
    }

    #[test]
    fn filter_examples() {
        let out = filter_paths(vec![scored(0.8), scored(0.5), scored(0.3)]).unwrap();
        assert_eq!(out.msq, 0.8);
        assert_eq!(out.threshold, 0.4);
        assert_eq!(sqs(&out.kept), vec![0.8, 0.5]);
        assert_eq!(sqs(&out.dropped), vec![0.3]);

        let single = filter_paths(vec![scored(0.2)]).unwrap();
        assert_eq!(sqs(&single.kept), vec![0.2]);

        let zeros = filter_paths(vec![scored(0.0), scored(0.0)]).unwrap();
        assert_eq!(zeros.kept.len(), 2);
        assert_eq!(zeros.threshold, 0.0);

        let boundary = filter_paths(vec![scored(0.5), scored(0.25)]).unwrap();
        assert_eq!(boundary.kept.len(), 2);

        let empty = filter_paths(Vec::new()).unwrap();
        assert!(empty.kept.is_empty() && empty.dropped.is_empty());
        assert_eq!(empty.msq, 0.0);
    }

    #[test]
    fn mixed_strategies_rejected() {
        let mut b = scored(0.3);
        b.strategy = ScoringStrategy::AllPairs;
        assert!(filter_paths(vec![scored(0.5), b]).is_err());
    }

    #[test]
    fn strategy_names_parse() {
        for s in [ScoringStrategy::TargetAnchored, ScoringStrategy::AllPairs, ScoringStrategy::Consecutive] {
            assert_eq!(s.to_string().parse::<ScoringStrategy>().unwrap(), s);
        }
        assert!("nearest".parse::<ScoringStrategy>().is_err());
    }

    proptest! {
        #[test]
        fn kept_is_nonempty_and_idempotent(scores in prop::collection::vec(0.0f64..=1.0, 1..30)) {
            let out = filter_paths(scores.iter().map(|&s| scored(s)).collect()).unwrap();
            prop_assert!(!out.kept.is_empty());
            let again = filter_paths(out.kept.clone()).unwrap();
            prop_assert_eq!(again.kept.len(), out.kept.len());
        }

        #[test]
        fn scaling_preserves_membership(scores in prop::collection::vec(0.0f64..=1.0, 1..30), c in 0.01f64..1.0) {
            let a = filter_paths(scores.iter().map(|&s| scored(s)).collect()).unwrap();
            let b = filter_paths(scores.iter().map(|&s| scored(s * c)).collect()).unwrap();
            prop_assert_eq!(a.kept.len(), b.kept.len());
        }
    }
}
