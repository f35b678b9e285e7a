//! Per-document knowledge graphs: triple lookup, predicate removal with
//! multi-edge unification, and concept-set pruning.

mod cache;
pub mod ntriples;
mod source;

use std::collections::BTreeSet;
use std::fmt::Write as _;

pub use cache::TripleCache;
pub use source::{
    describe_resource, title_case, Description, DumpSource, PredicateFilter, SparqlConfig,
    SparqlSource, TripleSource,
};

use crate::preprocess::ConceptSet;

#[derive(Debug, thiserror::Error)]
pub enum KgError {
    #[error("triple source unreachable: {0}")]
    Network(String),
    #[error("cache miss")]
    CacheMiss,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("N-Triples parse error: {0}")]
    Parse(String),
    #[error("malformed graph file: {0}")]
    Format(String),
    #[error("triple field must be non-empty")]
    EmptyField,
}

/// A resource-to-resource statement. All three fields are IRIs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RdfTriple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl RdfTriple {
    pub fn new(
        subject: impl Into<String>,
        predicate: impl Into<String>,
        object: impl Into<String>,
    ) -> Result<Self, KgError> {
        let t = Self { subject: subject.into(), predicate: predicate.into(), object: object.into() };
        if t.subject.is_empty() || t.predicate.is_empty() || t.object.is_empty() {
            return Err(KgError::EmptyField);
        }
        Ok(t)
    }
}

pub type TripleSet = BTreeSet<RdfTriple>;

/// Simple undirected graph over entity identifiers.
///
/// Edges are stored as `(u, v)` with `u < v`; self-loops are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeGraph {
    nodes: BTreeSet<String>,
    edges: BTreeSet<(String, String)>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: impl Into<String>) {
        self.nodes.insert(id.into());
    }

    /// Adds an undirected edge and both endpoints. Returns false for a
    /// self-loop, which is dropped.
    pub fn add_edge(&mut self, a: &str, b: &str) -> bool {
        if a == b {
            return false;
        }
        self.nodes.insert(a.to_string());
        self.nodes.insert(b.to_string());
        self.edges.insert(ordered(a, b));
        true
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    pub fn contains_edge(&self, a: &str, b: &str) -> bool {
        let (u, v) = ordered(a, b);
        self.edges.contains(&(u, v))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Line format: `nodes <n>`, one id per line, `edges <m>`, one
    /// `u<TAB>v` per line with `u < v`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "nodes {}", self.nodes.len()).unwrap();
        for n in &self.nodes {
            out.push_str(n);
            out.push('\n');
        }
        writeln!(out, "edges {}", self.edges.len()).unwrap();
        for (u, v) in &self.edges {
            writeln!(out, "{u}\t{v}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, KgError> {
        let mut lines = text.lines();
        let mut graph = Self::new();
        for id in read_section(&mut lines, "nodes")? {
            graph.add_node(id);
        }
        for line in read_section(&mut lines, "edges")? {
            let (u, v) = split_pair(line)?;
            if !graph.nodes.contains(u) || !graph.nodes.contains(v) {
                return Err(KgError::Format(format!("edge endpoint not declared: {line}")));
            }
            graph.add_edge(u, v);
        }
        Ok(graph)
    }
}

pub(crate) fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Reads a `<name> <count>` header followed by `count` lines.
pub(crate) fn read_section<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    name: &str,
) -> Result<Vec<&'a str>, KgError> {
    let header = lines
        .next()
        .ok_or_else(|| KgError::Format(format!("missing `{name}` header")))?;
    let count = header
        .strip_prefix(name)
        .and_then(|rest| rest.trim().parse::<usize>().ok())
        .ok_or_else(|| KgError::Format(format!("expected `{name} <count>`, got `{header}`")))?;
    let body: Vec<&str> = lines.take(count).collect();
    if body.len() != count {
        return Err(KgError::Format(format!("`{name}` section truncated")));
    }
    Ok(body)
}

pub(crate) fn split_pair(line: &str) -> Result<(&str, &str), KgError> {
    line.split_once('\t')
        .ok_or_else(|| KgError::Format(format!("expected `u<TAB>v`, got `{line}`")))
}

/// Strips the source's resource prefix, leaving the local name. IRIs
/// outside the prefix are kept whole.
pub fn node_id<'a>(iri: &'a str, resource_prefix: &str) -> &'a str {
    iri.strip_prefix(resource_prefix).filter(|s| !s.is_empty()).unwrap_or(iri)
}

/// Graph over one document's triples plus the concept names as they were
/// resolved against the source (a title-case retry can rename a concept).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocumentGraph {
    pub graph: KnowledgeGraph,
    pub concepts: ConceptSet,
    pub misses: Vec<String>,
}

/// Turns a set of triples into a simple undirected graph: predicates are
/// dropped, parallel and reversed edges merge, self-referential triples
/// are skipped.
pub fn graph_from_triples<'a>(
    triples: impl IntoIterator<Item = &'a RdfTriple>,
    resource_prefix: &str,
) -> KnowledgeGraph {
    let mut graph = KnowledgeGraph::new();
    for t in triples {
        graph.add_edge(node_id(&t.subject, resource_prefix), node_id(&t.object, resource_prefix));
    }
    graph
}

/// Looks up every concept and builds the unpruned document graph.
pub fn build_document_graph(
    concepts: &ConceptSet,
    source: &dyn TripleSource,
    cache: Option<&TripleCache>,
) -> Result<DocumentGraph, KgError> {
    let mut all = TripleSet::new();
    let mut resolved = ConceptSet::new();
    let mut misses = Vec::new();
    for concept in concepts {
        let desc = describe_resource(concept, source, cache)?;
        if desc.triples.is_empty() {
            log::debug!("no description for concept {concept}");
            misses.push(concept.clone());
            resolved.insert(concept.clone());
        } else {
            resolved.insert(desc.resource);
            all.extend(desc.triples);
        }
    }
    Ok(DocumentGraph {
        graph: graph_from_triples(&all, source.resource_prefix()),
        concepts: resolved,
        misses,
    })
}

/// Keeps edges whose endpoints are both concepts, plus concept nodes that
/// were present in the input graph.
pub fn prune_graph(graph: &KnowledgeGraph, concepts: &ConceptSet) -> KnowledgeGraph {
    let mut out = KnowledgeGraph::new();
    for (u, v) in &graph.edges {
        if concepts.contains(u) && concepts.contains(v) {
            out.add_edge(u, v);
        }
    }
    for n in graph.nodes.iter().filter(|n| concepts.contains(*n)) {
        out.add_node(n.clone());
    }
    out
}
