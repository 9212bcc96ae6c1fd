//! Bounded-length simple path enumeration between two concepts.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::kb_graph::{ConceptId, Direction, KnowledgeGraph, NeighborMode, RelationTypeId};

/// Longest path size (in relations) the search accepts.
pub const MAX_SUPPORTED_LEN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionMode {
    /// Follow edges only along their stored orientation.
    Directed,
    /// Follow edges both ways, recording the traversal direction per step.
    Undirected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_len: usize,
    pub max_paths: Option<usize>,
    pub direction_mode: DirectionMode,
    /// Upper bound accepted for `max_len`.
    pub len_cap: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_len: 3,
            max_paths: None,
            direction_mode: DirectionMode::Undirected,
            len_cap: MAX_SUPPORTED_LEN,
        }
    }
}

impl SearchLimits {
    pub fn with_max_len(max_len: usize) -> Self {
        SearchLimits {
            max_len,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_len == 0 || self.max_len > self.len_cap {
            return Err(Error::InvalidArgument(format!(
                "max_len must be in 1..={}, got {}",
                self.len_cap, self.max_len
            )));
        }
        Ok(())
    }

    fn neighbor_mode(&self) -> NeighborMode {
        match self.direction_mode {
            DirectionMode::Directed => NeighborMode::Outgoing,
            DirectionMode::Undirected => NeighborMode::Both,
        }
    }
}

/// `concepts[0] -relations[0]-> concepts[1] ... -> concepts[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationPath {
    pub concepts: Vec<ConceptId>,
    pub relations: Vec<RelationTypeId>,
    pub directions: Vec<Direction>,
}

impl RelationPath {
    /// Size in relations.
    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn source(&self) -> ConceptId {
        self.concepts[0]
    }

    pub fn target(&self) -> ConceptId {
        *self.concepts.last().expect("path has at least one concept")
    }

    pub fn intermediates(&self) -> &[ConceptId] {
        let n = self.concepts.len();
        if n <= 2 {
            &[]
        } else {
            &self.concepts[1..n - 1]
        }
    }

    /// Ordering key: length first, then (relation, concept, direction) per step.
    fn canonical_key(&self) -> (usize, Vec<(RelationTypeId, ConceptId, Direction)>) {
        let steps = (0..self.len())
            .map(|i| (self.relations[i], self.concepts[i + 1], self.directions[i]))
            .collect();
        (self.len(), steps)
    }

    /// `child/canbe/baby/atlocation/cradle`
    pub fn render(&self, g: &KnowledgeGraph) -> String {
        let mut out = String::from(g.concept_name(self.concepts[0]));
        for (r, c) in self.relations.iter().zip(&self.concepts[1..]) {
            out.push('/');
            out.push_str(g.relation_name(*r));
            out.push('/');
            out.push_str(g.concept_name(*c));
        }
        out
    }

    /// `f,r,f`
    pub fn render_directions(&self) -> String {
        self.directions
            .iter()
            .map(|d| d.as_char().to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Inverse of [`render`](Self::render) plus [`render_directions`](Self::render_directions).
    pub fn parse(g: &KnowledgeGraph, rendered: &str, directions: &str) -> Result<Self> {
        let parts: Vec<&str> = rendered.split('/').collect();
        if parts.len() < 3 || parts.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "malformed path rendering {rendered:?}"
            )));
        }
        let mut concepts = Vec::new();
        let mut relations = Vec::new();
        for (i, p) in parts.iter().enumerate() {
            if i % 2 == 0 {
                concepts.push(
                    g.concept(p)
                        .ok_or_else(|| Error::UnknownConcept(p.to_string()))?,
                );
            } else {
                relations.push(g.relation(p).ok_or_else(|| {
                    Error::InvalidArgument(format!("unknown relation {p:?}"))
                })?);
            }
        }
        let dirs: Vec<Direction> = directions
            .split(',')
            .map(|d| {
                let mut chars = d.trim().chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => Direction::from_char(c),
                    _ => None,
                }
                .ok_or_else(|| Error::InvalidArgument(format!("bad direction {d:?}")))
            })
            .collect::<Result<_>>()?;
        if dirs.len() != relations.len() {
            return Err(Error::InvalidArgument(format!(
                "{} directions for {} relations",
                dirs.len(),
                relations.len()
            )));
        }
        Ok(RelationPath {
            concepts,
            relations,
            directions: dirs,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSearchResult {
    pub paths: Vec<RelationPath>,
    /// Set when `max_paths` cut the result short.
    pub truncated: bool,
}

fn check_endpoints(g: &KnowledgeGraph, e1: ConceptId, e2: ConceptId) -> Result<()> {
    for c in [e1, e2] {
        if !g.contains(c) {
            return Err(Error::UnknownConcept(format!("#{}", c.0)));
        }
    }
    if e1 == e2 {
        return Err(Error::InvalidArgument(
            "source and target concepts must differ".into(),
        ));
    }
    Ok(())
}

struct Walker<'a> {
    g: &'a KnowledgeGraph,
    target: ConceptId,
    mode: NeighborMode,
    max_len: usize,
    visited: Vec<bool>,
    concepts: Vec<ConceptId>,
    relations: Vec<RelationTypeId>,
    directions: Vec<Direction>,
}

impl<'a> Walker<'a> {
    fn new(g: &'a KnowledgeGraph, e1: ConceptId, e2: ConceptId, limits: &SearchLimits) -> Self {
        let mut visited = vec![false; g.concept_count()];
        visited[e1.index()] = true;
        Walker {
            g,
            target: e2,
            mode: limits.neighbor_mode(),
            max_len: limits.max_len,
            visited,
            concepts: vec![e1],
            relations: Vec::new(),
            directions: Vec::new(),
        }
    }

    /// Depth-first walk; `emit` is called with the current stack whenever it
    /// ends at the target.
    fn walk(&mut self, emit: &mut dyn FnMut(&Self)) {
        let here = *self.concepts.last().unwrap();
        let last_step = self.relations.len() + 1 == self.max_len;
        let neighbors = self
            .g
            .neighbors(here, self.mode)
            .expect("walker only visits known concepts");
        for n in neighbors {
            if n.concept == self.target {
                self.push(n.relation, n.concept, n.direction);
                emit(self);
                self.pop();
                continue;
            }
            if last_step || self.visited[n.concept.index()] {
                continue;
            }
            self.visited[n.concept.index()] = true;
            self.push(n.relation, n.concept, n.direction);
            self.walk(emit);
            self.pop();
            self.visited[n.concept.index()] = false;
        }
    }

    fn push(&mut self, r: RelationTypeId, c: ConceptId, d: Direction) {
        self.relations.push(r);
        self.concepts.push(c);
        self.directions.push(d);
    }

    fn pop(&mut self) {
        self.relations.pop();
        self.concepts.pop();
        self.directions.pop();
    }

    fn snapshot(&self) -> RelationPath {
        RelationPath {
            concepts: self.concepts.clone(),
            relations: self.relations.clone(),
            directions: self.directions.clone(),
        }
    }
}

/// All simple paths from `e1` to `e2` of size at most `limits.max_len`, in
/// canonical order.
pub fn enumerate_paths(
    g: &KnowledgeGraph,
    e1: ConceptId,
    e2: ConceptId,
    limits: &SearchLimits,
) -> Result<PathSearchResult> {
    limits.validate()?;
    check_endpoints(g, e1, e2)?;
    let mut paths = Vec::new();
    let mut walker = Walker::new(g, e1, e2, limits);
    walker.walk(&mut |w| paths.push(w.snapshot()));
    paths.sort_by_cached_key(RelationPath::canonical_key);
    let truncated = match limits.max_paths {
        Some(cap) if paths.len() > cap => {
            paths.truncate(cap);
            true
        }
        _ => false,
    };
    Ok(PathSearchResult { paths, truncated })
}

/// Path counts per size without materializing the paths.
pub fn count_paths_by_length(
    g: &KnowledgeGraph,
    e1: ConceptId,
    e2: ConceptId,
    limits: &SearchLimits,
) -> Result<BTreeMap<usize, usize>> {
    limits.validate()?;
    check_endpoints(g, e1, e2)?;
    let mut counts = BTreeMap::new();
    let mut walker = Walker::new(g, e1, e2, limits);
    walker.walk(&mut |w| *counts.entry(w.relations.len()).or_insert(0) += 1);
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(src: &str) -> KnowledgeGraph {
        KnowledgeGraph::load_edges(src.as_bytes()).unwrap()
    }

    #[test]
    fn child_cradle_two_step() {
        let g = graph("canbe\tchild\tbaby\natlocation\tbaby\tcradle\n");
        let (c, k) = (g.concept("child").unwrap(), g.concept("cradle").unwrap());
        let res = enumerate_paths(&g, c, k, &SearchLimits::with_max_len(2)).unwrap();
        assert_eq!(res.paths.len(), 1);
        assert_eq!(res.paths[0].render(&g), "child/canbe/baby/atlocation/cradle");
        assert_eq!(res.paths[0].render_directions(), "f,f");
        assert!(!res.truncated);

        let direct = enumerate_paths(&g, c, k, &SearchLimits::with_max_len(1)).unwrap();
        assert!(direct.paths.is_empty());

        let counts = count_paths_by_length(&g, c, k, &SearchLimits::default()).unwrap();
        assert_eq!(counts, BTreeMap::from([(2, 1)]));
    }

    #[test]
    fn triangle_with_direct_edge() {
        let g = graph("r\te1\tx\nr\tx\te2\nr\te1\te2\n");
        let (a, b) = (g.concept("e1").unwrap(), g.concept("e2").unwrap());
        let limits = SearchLimits::with_max_len(2);
        let res = enumerate_paths(&g, a, b, &limits).unwrap();
        let counts = count_paths_by_length(&g, a, b, &limits).unwrap();
        assert_eq!(counts, BTreeMap::from([(1, 1), (2, 1)]));
        assert_eq!(res.paths.len(), 2);
        assert_eq!(res.paths[0].len(), 1);
    }

    #[test]
    fn directed_mode_ignores_reverse_edges() {
        let g = graph("canbe\tbaby\tchild\natlocation\tbaby\tcradle\n");
        let (c, k) = (g.concept("child").unwrap(), g.concept("cradle").unwrap());
        let undirected = enumerate_paths(&g, c, k, &SearchLimits::default()).unwrap();
        assert_eq!(undirected.paths.len(), 1);
        assert_eq!(undirected.paths[0].render_directions(), "r,f");
        let directed = SearchLimits {
            direction_mode: DirectionMode::Directed,
            ..Default::default()
        };
        assert!(enumerate_paths(&g, c, k, &directed).unwrap().paths.is_empty());
    }

    #[test]
    fn truncation_is_flagged() {
        let g = graph("a\ts\tt\nb\ts\tt\nc\ts\tt\n");
        let (s, t) = (g.concept("s").unwrap(), g.concept("t").unwrap());
        let limits = SearchLimits {
            max_paths: Some(2),
            ..Default::default()
        };
        let res = enumerate_paths(&g, s, t, &limits).unwrap();
        assert_eq!(res.paths.len(), 2);
        assert!(res.truncated);
        assert_eq!(g.relation_name(res.paths[0].relations[0]), "a");
    }

    #[test]
    fn errors() {
        let g = graph("r\ta\tb\n");
        let a = g.concept("a").unwrap();
        assert!(enumerate_paths(&g, a, a, &SearchLimits::default()).is_err());
        assert!(enumerate_paths(&g, a, ConceptId(7), &SearchLimits::default()).is_err());
        assert!(enumerate_paths(&g, a, g.concept("b").unwrap(), &SearchLimits::with_max_len(4)).is_err());
        assert!(count_paths_by_length(&g, a, a, &SearchLimits::default()).is_err());
    }

    #[test]
    fn render_parse_round_trip() {
        let g = graph("canbe\tbaby\tchild\natlocation\tbaby\tcradle\n");
        let (c, k) = (g.concept("child").unwrap(), g.concept("cradle").unwrap());
        let p = enumerate_paths(&g, c, k, &SearchLimits::default()).unwrap().paths[0].clone();
        let back = RelationPath::parse(&g, &p.render(&g), &p.render_directions()).unwrap();
        assert_eq!(back, p);
        assert!(RelationPath::parse(&g, "child/canbe", "f").is_err());
        assert!(RelationPath::parse(&g, "child/canbe/baby", "f,f").is_err());
    }
}
