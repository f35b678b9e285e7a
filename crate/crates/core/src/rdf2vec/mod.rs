//! Random-walk node embeddings: walks over the aggregated graph are fed to
//! a skip-gram model with negative sampling, the same way sentences are fed
//! to word2vec.

mod skipgram;
mod walks;

use std::fmt::Write as _;

use indexmap::IndexSet;
use ndarray::{Array2, ArrayView1};

pub use skipgram::{train_skip_gram, SkipGramConfig, SkipGramOutcome};
pub use walks::{generate_walks, WalkConfig, WalkCorpus};

#[derive(Debug, thiserror::Error)]
pub enum Rdf2VecError {
    #[error("walk corpus is empty")]
    EmptyCorpus,
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("embedding training produced non-finite values in epoch {0}")]
    NonFinite(usize),
    #[error("malformed embedding file: {0}")]
    Format(String),
}

/// One `dim`-wide row per graph node, in graph node order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    ids: IndexSet<String>,
    vectors: Array2<f64>,
}

impl EmbeddingMatrix {
    pub fn new(ids: Vec<String>, vectors: Array2<f64>) -> Result<Self, Rdf2VecError> {
        if ids.len() != vectors.nrows() {
            return Err(Rdf2VecError::Format(format!(
                "{} ids for {} rows",
                ids.len(),
                vectors.nrows()
            )));
        }
        let n = ids.len();
        let ids: IndexSet<String> = ids.into_iter().collect();
        if ids.len() != n {
            return Err(Rdf2VecError::Format("duplicate node id".into()));
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Rdf2VecError::Format("non-finite value".into()));
        }
        Ok(Self { ids, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn ids(&self) -> &IndexSet<String> {
        &self.ids
    }

    pub fn row(&self, index: usize) -> ArrayView1<'_, f64> {
        self.vectors.row(index)
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    /// The embedding of a node by id.
    pub fn embedding_for(&self, id: &str) -> Result<ArrayView1<'_, f64>, Rdf2VecError> {
        self.ids
            .get_index_of(id)
            .map(|i| self.vectors.row(i))
            .ok_or_else(|| Rdf2VecError::UnknownNode(id.to_string()))
    }

    /// word2vec text format: `N dim`, then `id v1 .. v_dim` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.len(), self.dim()).unwrap();
        for (id, row) in self.ids.iter().zip(self.vectors.outer_iter()) {
            out.push_str(id);
            for v in row {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, Rdf2VecError> {
        let bad = |m: &str| Rdf2VecError::Format(m.to_string());
        let mut lines = text.lines();
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("empty file"))?
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad("bad header")))
            .collect::<Result<_, _>>()?;
        let [n, dim] = header[..] else { return Err(bad("header must be `N dim`")) };
        let mut ids = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n * dim);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| bad("truncated"))?;
            let mut cells = line.split_whitespace();
            ids.push(cells.next().ok_or_else(|| bad("missing id"))?.to_string());
            let before = data.len();
            for c in cells {
                data.push(c.parse::<f64>().map_err(|_| bad("bad value"))?);
            }
            if data.len() - before != dim {
                return Err(bad("row width differs from header"));
            }
        }
        let vectors = Array2::from_shape_vec((n, dim), data).map_err(|e| bad(&e.to_string()))?;
        Self::new(ids, vectors)
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let denom = a.dot(&a).sqrt() * b.dot(&b).sqrt();
    if denom == 0.0 { 0.0 } else { a.dot(&b) / denom }
}
