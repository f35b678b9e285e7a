//! Corpus-level graph: the union of all pruned document graphs with one
//! node per essay attached to the entities it mentions, plus the binary
//! feature and label matrices built over it.

use std::collections::{BTreeSet, HashSet};
use std::fmt::{self, Write as _};
use std::io::Read;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::kg::{read_section, split_pair, KgError, KnowledgeGraph};
use crate::preprocess::{ConceptSet, Document};

#[derive(Debug, thiserror::Error)]
pub enum AggregateError {
    #[error("duplicate document id `{0}`")]
    DuplicateDocumentId(String),
    #[error("document `{0}` has no labels")]
    MissingLabel(String),
    #[error("essay nodes already attached")]
    AlreadyAttached,
    #[error("label file: {0}")]
    LabelFile(String),
    #[error(transparent)]
    Graph(#[from] KgError),
}

/// The Big Five traits in their conventional order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Trait {
    O,
    C,
    E,
    A,
    N,
}

impl Trait {
    pub const ALL: [Trait; 5] = [Trait::O, Trait::C, Trait::E, Trait::A, Trait::N];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Trait::O => "O",
            Trait::C => "C",
            Trait::E => "E",
            Trait::A => "A",
            Trait::N => "N",
        }
    }
}

impl fmt::Display for Trait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Five binary labels ordered O, C, E, A, N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TraitLabels(pub [u8; 5]);

impl TraitLabels {
    /// Accepts `1`/`0` or `y`/`n` per cell (case-insensitive).
    pub fn parse_cells<S: AsRef<str>>(cells: &[S]) -> Option<Self> {
        if cells.len() != 5 {
            return None;
        }
        let mut out = [0u8; 5];
        for (slot, cell) in out.iter_mut().zip(cells) {
            *slot = match cell.as_ref().trim().to_ascii_lowercase().as_str() {
                "1" | "y" | "yes" | "true" => 1,
                "0" | "n" | "no" | "false" => 0,
                _ => return None,
            };
        }
        Some(Self(out))
    }

    pub fn get(&self, t: Trait) -> u8 {
        self.0[t.index()]
    }
}

/// Reads a `doc_id,O,C,E,A,N` label CSV.
pub fn read_label_csv<R: Read>(reader: R) -> Result<Vec<(String, TraitLabels)>, AggregateError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| AggregateError::LabelFile(e.to_string()))?;
        let cells: Vec<&str> = record.iter().collect();
        if cells.len() != 6 {
            return Err(AggregateError::LabelFile(format!("expected 6 columns, got {}", cells.len())));
        }
        let labels = TraitLabels::parse_cells(&cells[1..])
            .ok_or_else(|| AggregateError::LabelFile(format!("bad label cells for `{}`", cells[0])))?;
        rows.push((cells[0].to_string(), labels));
    }
    Ok(rows)
}

pub fn write_label_csv(rows: &[(String, TraitLabels)]) -> String {
    let mut out = String::from("doc_id,O,C,E,A,N\n");
    for (id, l) in rows {
        let [o, c, e, a, n] = l.0;
        writeln!(out, "{id},{o},{c},{e},{a},{n}").unwrap();
    }
    out
}

/// Union graph over entity and essay nodes.
///
/// Node indices put entities first (first-seen order) and essays after
/// them (corpus order). Edges are stored by index; entity-entity pairs as
/// `(low, high)`, essay-entity pairs as `(essay position, entity index)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AggregatedGraph {
    entities: IndexSet<String>,
    essays: IndexSet<String>,
    entity_edges: BTreeSet<(usize, usize)>,
    essay_edges: BTreeSet<(usize, usize)>,
}

impl AggregatedGraph {
    pub fn entities(&self) -> &IndexSet<String> {
        &self.entities
    }

    pub fn essays(&self) -> &IndexSet<String> {
        &self.essays
    }

    pub fn entity_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.entity_edges
    }

    pub fn essay_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.essay_edges
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn essay_count(&self) -> usize {
        self.essays.len()
    }

    pub fn node_count(&self) -> usize {
        self.entities.len() + self.essays.len()
    }

    pub fn edge_count(&self) -> usize {
        self.entity_edges.len() + self.essay_edges.len()
    }

    /// Global node index of the essay at corpus position `pos`.
    pub fn essay_node(&self, pos: usize) -> usize {
        self.entities.len() + pos
    }

    /// Global node ids: entity names, then essay ids.
    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.entities.iter().chain(self.essays.iter()).map(String::as_str)
    }

    /// Undirected neighbor lists over all nodes, sorted, without self-loops.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count()];
        for &(u, v) in &self.entity_edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for &(d, e) in &self.essay_edges {
            let node = self.essay_node(d);
            adj[node].push(e);
            adj[e].push(node);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Serialized form: the entity part in the document-graph format,
    /// followed by `essays <count>` and `essay_edges <count>` sections.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "nodes {}", self.entities.len()).unwrap();
        for e in &self.entities {
            writeln!(out, "{e}").unwrap();
        }
        let mut pairs: Vec<(&str, &str)> = self
            .entity_edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (self.entities[u].as_str(), self.entities[v].as_str());
                if a <= b { (a, b) } else { (b, a) }
            })
            .collect();
        pairs.sort_unstable();
        writeln!(out, "edges {}", pairs.len()).unwrap();
        for (u, v) in pairs {
            writeln!(out, "{u}\t{v}").unwrap();
        }
        writeln!(out, "essays {}", self.essays.len()).unwrap();
        for d in &self.essays {
            writeln!(out, "{d}").unwrap();
        }
        writeln!(out, "essay_edges {}", self.essay_edges.len()).unwrap();
        for &(d, e) in &self.essay_edges {
            writeln!(out, "{}\t{}", self.essays[d], self.entities[e]).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, AggregateError> {
        let bad = |m: String| AggregateError::Graph(KgError::Format(m));
        let mut lines = text.lines();
        let mut g = Self::default();
        for e in read_section(&mut lines, "nodes")? {
            if !g.entities.insert(e.to_string()) {
                return Err(bad(format!("duplicate entity `{e}`")));
            }
        }
        for line in read_section(&mut lines, "edges")? {
            let (u, v) = split_pair(line)?;
            let (Some(u), Some(v)) = (g.entities.get_index_of(u), g.entities.get_index_of(v)) else {
                return Err(bad(format!("unknown edge endpoint in `{line}`")));
            };
            g.entity_edges.insert((u.min(v), u.max(v)));
        }
        for d in read_section(&mut lines, "essays")? {
            if !g.essays.insert(d.to_string()) {
                return Err(AggregateError::DuplicateDocumentId(d.to_string()));
            }
        }
        for line in read_section(&mut lines, "essay_edges")? {
            let (d, e) = split_pair(line)?;
            let (Some(d), Some(e)) = (g.essays.get_index_of(d), g.entities.get_index_of(e)) else {
                return Err(bad(format!("unknown essay edge endpoint in `{line}`")));
            };
            g.essay_edges.insert((d, e));
        }
        Ok(g)
    }
}

/// Unions document graphs. Entities are numbered in first-seen order,
/// walking the graphs in sequence and each graph's nodes in sorted order.
pub fn aggregate_graphs<'a>(graphs: impl IntoIterator<Item = &'a KnowledgeGraph>) -> AggregatedGraph {
    let mut agg = AggregatedGraph::default();
    for g in graphs {
        for n in g.nodes() {
            agg.entities.insert(n.clone());
        }
        for (u, v) in g.edges() {
            let (u, v) = (agg.entities.get_index_of(u).unwrap(), agg.entities.get_index_of(v).unwrap());
            agg.entity_edges.insert((u.min(v), u.max(v)));
        }
    }
    agg
}

/// Adds one essay node per document, linked to every entity of the graph
/// that appears in that document's concept set.
pub fn attach_essay_nodes(
    mut agg: AggregatedGraph,
    corpus: &[(String, ConceptSet)],
) -> Result<AggregatedGraph, AggregateError> {
    if !agg.essays.is_empty() {
        return Err(AggregateError::AlreadyAttached);
    }
    for (doc_id, concepts) in corpus {
        let (pos, fresh) = agg.essays.insert_full(doc_id.clone());
        if !fresh {
            return Err(AggregateError::DuplicateDocumentId(doc_id.clone()));
        }
        for c in concepts {
            if let Some(e) = agg.entities.get_index_of(c) {
                agg.essay_edges.insert((pos, e));
            }
        }
    }
    Ok(agg)
}

/// What entity-node feature rows contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityFeatures {
    /// One-hot at the entity's own column.
    #[default]
    SelfIndicator,
    /// All-zero rows.
    Zero,
}

/// Binary node features in sparse row form (sorted active columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMatrix {
    cols: usize,
    rows: Vec<Vec<u32>>,
}

impl FeatureMatrix {
    pub fn new(cols: usize, rows: Vec<Vec<u32>>) -> Self {
        debug_assert!(rows.iter().flatten().all(|&c| (c as usize) < cols));
        Self { cols, rows }
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.rows[i]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut Vec<u32> {
        &mut self.rows[i]
    }

    pub fn dense_row(&self, i: usize) -> Vec<u8> {
        let mut out = vec![0u8; self.cols];
        for &c in &self.rows[i] {
            out[c as usize] = 1;
        }
        out
    }

    /// `features <rows> <cols>` then one line of space-separated active
    /// column indices per row.
    pub fn to_text(&self) -> String {
        let mut out = format!("features {} {}\n", self.rows.len(), self.cols);
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(u32::to_string).collect();
            writeln!(out, "{}", cells.join(" ")).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, AggregateError> {
        let bad = |m: &str| AggregateError::Graph(KgError::Format(m.to_string()));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty feature file"))?;
        let dims: Vec<usize> = header
            .strip_prefix("features ")
            .ok_or_else(|| bad("missing `features` header"))?
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad("bad feature dimensions")))
            .collect::<Result<_, _>>()?;
        let [n, cols] = dims[..] else { return Err(bad("bad feature dimensions")) };
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| bad("feature file truncated"))?;
            let row: Vec<u32> = line
                .split_whitespace()
                .map(|s| s.parse().map_err(|_| bad("bad column index")))
                .collect::<Result<_, _>>()?;
            if row.iter().any(|&c| c as usize >= cols) {
                return Err(bad("column index out of range"));
            }
            rows.push(row);
        }
        Ok(Self { cols, rows })
    }
}

/// Builds the `N x F` binary feature matrix (`F` = entity count).
///
/// Essay rows mark the entities that occur in the essay's concept set;
/// entity rows follow `mode`. `concepts` is aligned with the essay order.
pub fn build_feature_matrix(
    agg: &AggregatedGraph,
    concepts: &[ConceptSet],
    mode: EntityFeatures,
) -> FeatureMatrix {
    let f = agg.entity_count();
    let mut rows = Vec::with_capacity(agg.node_count());
    for j in 0..f {
        rows.push(match mode {
            EntityFeatures::SelfIndicator => vec![j as u32],
            EntityFeatures::Zero => Vec::new(),
        });
    }
    for pos in 0..agg.essay_count() {
        let mut row: Vec<u32> = concepts
            .get(pos)
            .into_iter()
            .flatten()
            .filter_map(|c| agg.entities.get_index_of(c).map(|j| j as u32))
            .collect();
        row.sort_unstable();
        row.dedup();
        rows.push(row);
    }
    FeatureMatrix::new(f, rows)
}

/// One label row per document, in corpus order.
pub fn build_label_matrix(corpus: &[Document]) -> Result<Vec<TraitLabels>, AggregateError> {
    let mut seen = HashSet::new();
    corpus
        .iter()
        .map(|d| {
            if !seen.insert(d.id.as_str()) {
                return Err(AggregateError::DuplicateDocumentId(d.id.clone()));
            }
            d.labels.ok_or_else(|| AggregateError::MissingLabel(d.id.clone()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn graph(edges: &[(&str, &str)]) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    fn cs(xs: &[&str]) -> ConceptSet {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn names(agg: &AggregatedGraph) -> BTreeSet<(String, String)> {
        agg.entity_edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (agg.entities[u].clone(), agg.entities[v].clone());
                if a <= b { (a, b) } else { (b, a) }
            })
            .collect()
    }

    #[test]
    fn union_examples() {
        let agg = aggregate_graphs(&[graph(&[("A", "B")]), graph(&[("B", "C")])]);
        assert_eq!(agg.entities().iter().collect::<Vec<_>>(), vec!["A", "B", "C"]);
        assert_eq!(agg.entity_edges().len(), 2);
        let g = graph(&[("A", "B"), ("B", "C")]);
        assert_eq!(aggregate_graphs(&[g.clone(), g.clone()]), aggregate_graphs(&[g]));
    }

    #[test]
    fn union_matches_set_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let graphs: Vec<KnowledgeGraph> = (0..10)
            .map(|_| {
                let mut g = KnowledgeGraph::new();
                for _ in 0..rng.gen_range(0..6) {
                    let a = format!("E{}", rng.gen_range(0..8));
                    let b = format!("E{}", rng.gen_range(0..8));
                    g.add_edge(&a, &b);
                }
                if rng.gen_bool(0.3) {
                    g.add_node(format!("E{}", rng.gen_range(8..10)));
                }
                g
            })
            .collect();
        let agg = aggregate_graphs(&graphs);
        let mut nodes = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for g in &graphs {
            nodes.extend(g.nodes().iter().cloned());
            edges.extend(g.edges().iter().cloned());
        }
        assert_eq!(agg.entities().iter().cloned().collect::<BTreeSet<_>>(), nodes);
        assert_eq!(names(&agg), edges);
        assert!(agg.essays().is_empty());
    }

    #[test]
    fn attach_examples() {
        let agg = aggregate_graphs(&[graph(&[("A", "B")])]);
        let agg = attach_essay_nodes(
            agg,
            &[("d".into(), cs(&["A", "Z"])), ("lonely".into(), cs(&["Q"]))],
        )
        .unwrap();
        assert_eq!(agg.essay_edges().iter().copied().collect::<Vec<_>>(), vec![(0, 0)]);
        assert_eq!(agg.essay_count(), 2);
        assert_eq!(agg.node_count(), 4);
        assert_eq!(agg.neighbors()[agg.essay_node(1)], Vec::<usize>::new());
    }

    #[test]
    fn attach_rejects_duplicates() {
        let agg = aggregate_graphs(&[graph(&[("A", "B")])]);
        let err = attach_essay_nodes(agg, &[("d".into(), cs(&[])), ("d".into(), cs(&[]))]);
        assert!(matches!(err, Err(AggregateError::DuplicateDocumentId(_))));
    }

    #[test]
    fn attach_matches_membership_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ents: Vec<String> = (0..10).map(|i| format!("E{i}")).collect();
        let mut g = KnowledgeGraph::new();
        for e in &ents {
            g.add_node(e.clone());
        }
        let agg = aggregate_graphs(&[g]);
        let corpus: Vec<(String, ConceptSet)> = (0..5)
            .map(|d| {
                let c = (0..14).filter(|_| rng.gen_bool(0.4)).map(|i| format!("E{i}")).collect();
                (format!("d{d}"), c)
            })
            .collect();
        let agg = attach_essay_nodes(agg, &corpus).unwrap();
        for (d, (_, concepts)) in corpus.iter().enumerate() {
            for (e, name) in ents.iter().enumerate() {
                assert_eq!(agg.essay_edges().contains(&(d, e)), concepts.contains(name));
            }
        }
        // no essay-essay edges: every essay edge's second index is an entity
        assert!(agg.essay_edges().iter().all(|&(_, e)| e < agg.entity_count()));
        assert_eq!(agg.edge_count(), agg.entity_edges().len() + agg.essay_edges().len());
    }

    #[test]
    fn feature_examples() {
        let mut g = KnowledgeGraph::new();
        g.add_node("A");
        g.add_node("B");
        let agg = aggregate_graphs(&[g]);
        let concepts = vec![cs(&["A"]), cs(&["A", "B"])];
        let agg = attach_essay_nodes(
            agg,
            &[("d0".into(), concepts[0].clone()), ("d1".into(), concepts[1].clone())],
        )
        .unwrap();
        let x = build_feature_matrix(&agg, &concepts, EntityFeatures::SelfIndicator);
        assert_eq!((x.rows(), x.cols()), (4, 2));
        assert_eq!(x.dense_row(0), vec![1, 0]);
        assert_eq!(x.dense_row(1), vec![0, 1]);
        assert_eq!(x.dense_row(2), vec![1, 0]);
        assert_eq!(x.dense_row(3), vec![1, 1]);
        let z = build_feature_matrix(&agg, &concepts, EntityFeatures::Zero);
        assert_eq!(z.dense_row(0), vec![0, 0]);
        assert_eq!(FeatureMatrix::from_text(&x.to_text()).unwrap(), x);
    }

    #[test]
    fn essay_row_sums_count_intersections() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut g = KnowledgeGraph::new();
        for i in 0..12 {
            g.add_node(format!("E{i}"));
        }
        let agg = aggregate_graphs(&[g]);
        let concepts: Vec<ConceptSet> = (0..6)
            .map(|_| (0..20).filter(|_| rng.gen_bool(0.5)).map(|i| format!("E{i}")).collect())
            .collect();
        let corpus: Vec<_> =
            concepts.iter().enumerate().map(|(i, c)| (format!("d{i}"), c.clone())).collect();
        let agg = attach_essay_nodes(agg, &corpus).unwrap();
        let x = build_feature_matrix(&agg, &concepts, EntityFeatures::SelfIndicator);
        for (pos, c) in concepts.iter().enumerate() {
            let expected = c.iter().filter(|e| agg.entities().contains(*e)).count();
            assert_eq!(x.row(agg.essay_node(pos)).len(), expected);
        }
    }

    #[test]
    fn labels() {
        let doc = |id: &str, l: Option<[u8; 5]>| Document {
            id: id.into(),
            text: "x".into(),
            labels: l.map(TraitLabels),
        };
        assert_eq!(
            TraitLabels::parse_cells(&["y", "n", "y", "n", "y"]),
            Some(TraitLabels([1, 0, 1, 0, 1]))
        );
        assert!(build_label_matrix(&[]).unwrap().is_empty());
        let table = build_label_matrix(&[doc("a", Some([1, 0, 1, 0, 1]))]).unwrap();
        assert_eq!(table, vec![TraitLabels([1, 0, 1, 0, 1])]);
        assert!(matches!(
            build_label_matrix(&[doc("a", None)]),
            Err(AggregateError::MissingLabel(_))
        ));
    }

    #[test]
    fn label_csv_round_trip() {
        let rows = vec![("d1".to_string(), TraitLabels([1, 0, 0, 1, 1]))];
        let text = write_label_csv(&rows);
        assert_eq!(read_label_csv(text.as_bytes()).unwrap(), rows);
        assert!(read_label_csv("doc_id,O,C,E,A,N\nx,1,0,2,0,0\n".as_bytes()).is_err());
    }

    #[test]
    fn text_round_trip_is_stable() {
        let agg = aggregate_graphs(&[graph(&[("B", "A"), ("C", "B")])]);
        let agg = attach_essay_nodes(agg, &[("d".into(), cs(&["C"]))]).unwrap();
        let text = agg.to_text();
        assert_eq!(
            text,
            "nodes 3\nA\nB\nC\nedges 2\nA\tB\nB\tC\nessays 1\nd\nessay_edges 1\nd\tC\n"
        );
        let back = AggregatedGraph::from_text(&text).unwrap();
        assert_eq!(back, agg);
        assert_eq!(back.to_text(), text);
    }
}
