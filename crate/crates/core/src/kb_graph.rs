//! ConceptNet-style knowledge graph: interned concepts and relation types
//! joined by directed, weighted edges.
//!
//! Ids are dense and assigned in sorted order of the normalized surface
//! forms, so two loads of the same edge set always produce the same ids no
//! matter how the rows were ordered.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConceptId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelationTypeId(pub u32);

impl ConceptId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RelationTypeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Direction in which an edge is traversed relative to its stored orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn as_char(self) -> char {
        match self {
            Direction::Forward => 'f',
            Direction::Reverse => 'r',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'f' => Some(Direction::Forward),
            'r' => Some(Direction::Reverse),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborMode {
    Outgoing,
    Incoming,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub relation: RelationTypeId,
    pub start: ConceptId,
    pub end: ConceptId,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Neighbor {
    pub relation: RelationTypeId,
    pub concept: ConceptId,
    pub direction: Direction,
}

/// Lowercase, trim, and join internal whitespace runs with a single underscore.
pub fn normalize(surface: &str) -> Result<String> {
    let parts: Vec<String> = surface.split_whitespace().map(str::to_lowercase).collect();
    if parts.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "cannot normalize blank surface {surface:?}"
        )));
    }
    Ok(parts.join("_"))
}

#[derive(Debug, Clone, Default)]
struct Interner {
    names: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Interner {
    fn from_sorted(names: BTreeSet<String>) -> Self {
        let names: Vec<String> = names.into_iter().collect();
        let ids = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        Interner { names, ids }
    }

    fn get(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }
}

/// Immutable after construction.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    concepts: Interner,
    relations: Interner,
    edges: Vec<Edge>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

struct RawRow {
    relation: String,
    start: String,
    end: String,
    weight: f64,
}

fn parse_row(line: &str, line_no: usize) -> Result<RawRow> {
    let fields: Vec<&str> = line.split('\t').collect();
    let err = |msg: String| Error::Parse { line: line_no, msg };
    if fields.len() < 3 || fields.len() > 4 {
        return Err(err(format!(
            "expected 3 or 4 tab-separated fields, found {}",
            fields.len()
        )));
    }
    let norm = |s: &str, what: &str| normalize(s).map_err(|_| err(format!("empty {what}")));
    let relation = norm(fields[0], "relation")?;
    let start = norm(fields[1], "start concept")?;
    let end = norm(fields[2], "end concept")?;
    let weight = match fields.get(3).map(|w| w.trim()) {
        None | Some("") => 1.0,
        Some(w) => w
            .parse::<f64>()
            .map_err(|_| err(format!("weight {w:?} is not a number")))?,
    };
    if !weight.is_finite() || weight < 0.0 {
        return Err(err(format!("weight {weight} must be finite and nonnegative")));
    }
    Ok(RawRow {
        relation,
        start,
        end,
        weight,
    })
}

impl KnowledgeGraph {
    /// Read a tab-separated edge file. Blank lines and lines starting with
    /// `#` are skipped; duplicate (relation, start, end) rows collapse into
    /// one edge carrying the largest weight.
    pub fn load_edges<R: BufRead>(source: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in source.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            rows.push(parse_row(trimmed, i + 1)?);
        }
        Ok(Self::from_rows(rows))
    }

    /// Build from already-normalized `(relation, start, end, weight)` tuples.
    pub fn from_triples<I, S>(triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S, S, f64)>,
        S: AsRef<str>,
    {
        let mut rows = Vec::new();
        for (i, (r, s, e, w)) in triples.into_iter().enumerate() {
            let line = format!("{}\t{}\t{}\t{}", r.as_ref(), s.as_ref(), e.as_ref(), w);
            rows.push(parse_row(&line, i + 1)?);
        }
        Ok(Self::from_rows(rows))
    }

    fn from_rows(rows: Vec<RawRow>) -> Self {
        let mut concept_names = BTreeSet::new();
        let mut relation_names = BTreeSet::new();
        for row in &rows {
            concept_names.insert(row.start.clone());
            concept_names.insert(row.end.clone());
            relation_names.insert(row.relation.clone());
        }
        let concepts = Interner::from_sorted(concept_names);
        let relations = Interner::from_sorted(relation_names);

        // BTreeMap keyed on ids gives a canonical edge order independent of row order.
        let mut dedup: BTreeMap<(u32, u32, u32), f64> = BTreeMap::new();
        for row in &rows {
            let key = (
                concepts.get(&row.start).unwrap(),
                relations.get(&row.relation).unwrap(),
                concepts.get(&row.end).unwrap(),
            );
            dedup
                .entry(key)
                .and_modify(|w| *w = w.max(row.weight))
                .or_insert(row.weight);
        }

        let n = concepts.names.len();
        let mut outgoing = vec![Vec::new(); n];
        let mut incoming = vec![Vec::new(); n];
        let mut edges = Vec::with_capacity(dedup.len());
        for ((s, r, e), weight) in dedup {
            let idx = edges.len();
            edges.push(Edge {
                relation: RelationTypeId(r),
                start: ConceptId(s),
                end: ConceptId(e),
                weight,
            });
            outgoing[s as usize].push(idx);
            incoming[e as usize].push(idx);
        }

        KnowledgeGraph {
            concepts,
            relations,
            edges,
            outgoing,
            incoming,
        }
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.names.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Lookup by surface text; the text is normalized first.
    pub fn concept(&self, surface: &str) -> Option<ConceptId> {
        let norm = normalize(surface).ok()?;
        self.concepts.get(&norm).map(ConceptId)
    }

    pub fn relation(&self, name: &str) -> Option<RelationTypeId> {
        let norm = normalize(name).ok()?;
        self.relations.get(&norm).map(RelationTypeId)
    }

    pub fn concept_name(&self, id: ConceptId) -> &str {
        &self.concepts.names[id.index()]
    }

    pub fn relation_name(&self, id: RelationTypeId) -> &str {
        &self.relations.names[id.index()]
    }

    /// Relation names in id order.
    pub fn relation_names(&self) -> &[String] {
        &self.relations.names
    }

    pub fn concept_names(&self) -> &[String] {
        &self.concepts.names
    }

    pub fn contains(&self, id: ConceptId) -> bool {
        id.index() < self.concept_count()
    }

    pub fn out_degree(&self, id: ConceptId) -> usize {
        self.outgoing[id.index()].len()
    }

    pub fn in_degree(&self, id: ConceptId) -> usize {
        self.incoming[id.index()].len()
    }

    pub fn outgoing_edges(&self, id: ConceptId) -> impl Iterator<Item = &Edge> + '_ {
        self.outgoing[id.index()].iter().map(move |&i| &self.edges[i])
    }

    pub fn incoming_edges(&self, id: ConceptId) -> impl Iterator<Item = &Edge> + '_ {
        self.incoming[id.index()].iter().map(move |&i| &self.edges[i])
    }

    /// Adjacent concepts sorted by (relation id, neighbor id, direction).
    pub fn neighbors(&self, c: ConceptId, mode: NeighborMode) -> Result<Vec<Neighbor>> {
        if !self.contains(c) {
            return Err(Error::UnknownConcept(format!("#{}", c.0)));
        }
        let mut out = Vec::new();
        if matches!(mode, NeighborMode::Outgoing | NeighborMode::Both) {
            out.extend(self.outgoing_edges(c).map(|e| Neighbor {
                relation: e.relation,
                concept: e.end,
                direction: Direction::Forward,
            }));
        }
        if matches!(mode, NeighborMode::Incoming | NeighborMode::Both) {
            out.extend(self.incoming_edges(c).map(|e| Neighbor {
                relation: e.relation,
                concept: e.start,
                direction: Direction::Reverse,
            }));
        }
        out.sort();
        Ok(out)
    }
}

/// One-line count summary, e.g. `4 concepts, 3 relations, 3 edges`.
impl fmt::Display for KnowledgeGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} concepts, {} relations, {} edges",
            self.concept_count(),
            self.relation_count(),
            self.edge_count()
        )
    }
}
