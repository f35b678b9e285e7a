//! Knowledge-graph attention network text classification.
//!
//! Documents are turned into concept sets ([`preprocess`]), expanded into
//! pruned knowledge graphs ([`kg`]), unioned into a single graph with one
//! node per document ([`aggregator`]) and classified with a multi-head
//! graph attention network ([`gat`]), optionally enriched with random-walk
//! node embeddings ([`rdf2vec`]). [`eval`] scores predictions and
//! [`pipeline`] chains the stages behind the `kgatnet` CLI.

pub mod aggregator;
pub mod eval;
pub mod fixture;
pub mod gat;
pub mod kg;
pub mod pipeline;
pub mod preprocess;
pub mod rdf2vec;
