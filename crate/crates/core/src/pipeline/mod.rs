//! File-backed stages from raw corpus to metric reports.
//!
//! ```text
//! <output_dir>/
//!   preprocess/index.txt, <doc>.concepts
//!   build/<doc>.graph, <doc>.concepts
//!   aggregate/graph.txt, features.txt, labels.csv
//!   embed/embeddings.txt, loss.csv
//!   train/<mode>/<protocol>/folds.csv, <trait>/fold<k>.ckpt, <trait>/fold<k>.history.csv
//!   evaluate/correlations.csv, <mode>/<protocol>/metrics.csv, metrics_long.csv, predictions.csv
//!   manifest.json
//! ```
//!
//! Each stage reads only the artifacts of earlier stages (plus the inputs
//! named in the config) and writes only its own directory.

mod config;
mod corpus;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{PipelineConfig, Protocol, SourceSpec};
pub use corpus::{attach_labels, check_doc_id, read_corpus};

use crate::aggregator::{
    aggregate_graphs, attach_essay_nodes, build_feature_matrix, read_label_csv, write_label_csv,
    AggregateError, AggregatedGraph, FeatureMatrix, Trait, TraitLabels,
};
use crate::eval::{
    confusion_counts, correlations_csv, holdout_split, kfold_split, trait_correlations, ConfusionCounts,
    EvalError, MetricReport,
};
use crate::gat::{
    history_csv, load_checkpoint, save_checkpoint, train_trait, AttentionGraph, GatError, GraphInputs,
};
use crate::kg::{
    build_document_graph, prune_graph, DumpSource, KgError, KnowledgeGraph, SparqlSource, TripleCache,
    TripleSource,
};
use crate::preprocess::{ConceptSet, Gazetteer, LemmaTable, Preprocessor, StopwordList};
use crate::rdf2vec::{generate_walks, train_skip_gram, EmbeddingMatrix, Rdf2VecError};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("missing stage input: {}", .0.display())]
    MissingStageInput(PathBuf),
    #[error("network failure: {0}")]
    Network(String),
    #[error("numerical divergence: {0}")]
    Divergence(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Invalid(String),
}

impl PipelineError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::MissingStageInput(_) => 3,
            Self::Network(_) => 4,
            Self::Divergence(_) => 5,
            Self::Io { .. } | Self::Invalid(_) => 1,
        }
    }
}

impl From<KgError> for PipelineError {
    fn from(e: KgError) -> Self {
        match e {
            KgError::Network(m) => Self::Network(m),
            other => Self::Invalid(other.to_string()),
        }
    }
}

impl From<GatError> for PipelineError {
    fn from(e: GatError) -> Self {
        match e {
            GatError::NonFiniteLoss => Self::Divergence(e.to_string()),
            GatError::InvalidConfig(m) => Self::Config(m),
            other => Self::Invalid(other.to_string()),
        }
    }
}

impl From<Rdf2VecError> for PipelineError {
    fn from(e: Rdf2VecError) -> Self {
        match e {
            Rdf2VecError::NonFinite(_) => Self::Divergence(e.to_string()),
            Rdf2VecError::InvalidConfig(m) => Self::Config(m),
            other => Self::Invalid(other.to_string()),
        }
    }
}

impl From<AggregateError> for PipelineError {
    fn from(e: AggregateError) -> Self {
        Self::Invalid(e.to_string())
    }
}

impl From<EvalError> for PipelineError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::InvalidK { .. } => Self::Config(e.to_string()),
            other => Self::Invalid(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, PipelineError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Preprocess,
    Build,
    Aggregate,
    Embed,
    Train,
    Evaluate,
}

impl Stage {
    pub const ALL: [Stage; 6] =
        [Stage::Preprocess, Stage::Build, Stage::Aggregate, Stage::Embed, Stage::Train, Stage::Evaluate];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Preprocess => "preprocess",
            Stage::Build => "build",
            Stage::Aggregate => "aggregate",
            Stage::Embed => "embed",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
        }
    }
}

fn read_artifact(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => PipelineError::MissingStageInput(path.to_path_buf()),
        _ => PipelineError::io(path, e),
    })
}

fn write_artifact(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| PipelineError::io(path, e))
}

fn concepts_to_text(c: &ConceptSet) -> String {
    c.iter().map(|s| format!("{s}\n")).collect()
}

fn concepts_from_text(text: &str) -> ConceptSet {
    text.lines().filter(|l| !l.is_empty()).map(String::from).collect()
}

fn modified(path: &Path) -> Option<SystemTime> {
    fs::metadata(path).and_then(|m| m.modified()).ok()
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| PipelineError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Training seed of one trait/fold job.
fn job_seed(seed: u64, t: Trait, fold: usize) -> u64 {
    seed.wrapping_add(1000 * t.index() as u64 + fold as u64)
}

/// Identifier of an essay node in the embedding file.
pub fn essay_embedding_id(doc_id: &str) -> String {
    format!("essay:{doc_id}")
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    mode: &'a str,
    config: &'a PipelineConfig,
    inputs: BTreeMap<String, String>,
    substitutions: Vec<&'static str>,
}

/// Loaded aggregate-stage artifacts.
pub struct AggregateArtifacts {
    pub graph: AggregatedGraph,
    pub features: FeatureMatrix,
    pub labels: Vec<(String, TraitLabels)>,
}

pub struct Pipeline {
    cfg: PipelineConfig,
    force: bool,
    pool: rayon::ThreadPool,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, force: bool) -> Result<Self> {
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(Self { cfg, force, pool })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn mode(&self) -> &'static str {
        if self.cfg.enriched { "enriched" } else { "plain" }
    }

    fn dir(&self, stage: &str) -> PathBuf {
        self.cfg.output_dir.join(stage)
    }

    pub fn run(&self, stage: Stage) -> Result<()> {
        log::info!("stage {}", stage.name());
        self.pool.install(|| match stage {
            Stage::Preprocess => self.preprocess(),
            Stage::Build => self.build(),
            Stage::Aggregate => self.aggregate(),
            Stage::Embed => self.embed(),
            Stage::Train => self.train(),
            Stage::Evaluate => self.evaluate(),
        })?;
        self.write_manifest(stage.name())
    }

    pub fn run_all(&self) -> Result<()> {
        for stage in Stage::ALL {
            if stage == Stage::Embed && !self.cfg.enriched {
                continue;
            }
            self.run(stage)?;
        }
        self.write_manifest("run-all")
    }

    fn load_preprocessor(&self) -> Result<Preprocessor> {
        let stopwords = match &self.cfg.stopwords {
            Some(p) => StopwordList::load(p).map_err(|e| PipelineError::io(p, e))?,
            None => StopwordList::bundled(),
        };
        let mut lemmas = LemmaTable::bundled();
        if let Some(p) = &self.cfg.lemmas {
            lemmas.extend(LemmaTable::load(p).map_err(|e| PipelineError::io(p, e))?);
        }
        let gazetteer = match (&self.cfg.gazetteer, self.cfg.source()?) {
            (Some(p), _) => Gazetteer::load(p, &lemmas).map_err(|e| PipelineError::io(p, e))?,
            (None, SourceSpec::Dump(path)) => {
                let dump = DumpSource::load(&path, &self.cfg.resource_prefix, &self.cfg.filter())?;
                Gazetteer::from_resource_names(dump.resource_names(), &lemmas)
            }
            (None, SourceSpec::Endpoint(_)) => {
                log::warn!("no gazetteer configured; multiword entities will not be recognized");
                Gazetteer::default()
            }
        };
        Ok(Preprocessor { stopwords, lemmas, gazetteer })
    }

    fn preprocess(&self) -> Result<()> {
        let mut docs = read_corpus(&self.cfg.corpus)?;
        if let Some(labels) = &self.cfg.labels {
            attach_labels(&mut docs, labels)?;
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(d) = docs.iter().find(|d| !seen.insert(d.id.clone())) {
            return Err(AggregateError::DuplicateDocumentId(d.id.clone()).into());
        }
        let dir = self.dir("preprocess");
        let inputs: Vec<&Path> = [Some(self.cfg.corpus.as_path()), self.cfg.stopwords.as_deref(),
            self.cfg.lemmas.as_deref(), self.cfg.gazetteer.as_deref()]
        .into_iter()
        .flatten()
        .collect();
        let newest_input = inputs.iter().filter_map(|p| modified(p)).max();
        let fresh = |p: &Path| match (modified(p), newest_input) {
            (Some(out), Some(inp)) => out >= inp,
            _ => false,
        };
        let pending: Vec<_> = docs
            .iter()
            .filter(|d| self.force || !fresh(&dir.join(format!("{}.concepts", d.id))))
            .collect();
        if pending.is_empty() {
            log::info!("preprocess: all {} documents up to date", docs.len());
        } else {
            let pre = self.load_preprocessor()?;
            pending.par_iter().try_for_each(|d| {
                let concepts = pre.concepts(&d.text);
                if concepts.is_empty() {
                    log::warn!("document {} yields no concepts", d.id);
                }
                write_artifact(&dir.join(format!("{}.concepts", d.id)), &concepts_to_text(&concepts))
            })?;
        }
        let index: String = docs.iter().map(|d| format!("{}\n", d.id)).collect();
        let index_path = dir.join("index.txt");
        if fs::read_to_string(&index_path).ok().as_deref() != Some(index.as_str()) {
            write_artifact(&index_path, &index)?;
        }
        Ok(())
    }

    fn doc_index(&self) -> Result<Vec<String>> {
        let text = read_artifact(&self.dir("preprocess").join("index.txt"))?;
        Ok(text.lines().filter(|l| !l.is_empty()).map(String::from).collect())
    }

    fn open_source(&self) -> Result<Box<dyn TripleSource>> {
        Ok(match self.cfg.source()? {
            SourceSpec::Dump(path) => {
                if !path.exists() {
                    return Err(PipelineError::Config(format!("dump {} not found", path.display())));
                }
                Box::new(DumpSource::load(&path, &self.cfg.resource_prefix, &self.cfg.filter())?)
            }
            SourceSpec::Endpoint(url) => Box::new(SparqlSource::new(self.cfg.sparql_config(&url))?),
        })
    }

    fn build(&self) -> Result<()> {
        let ids = self.doc_index()?;
        let pre_dir = self.dir("preprocess");
        let concept_sets: Vec<ConceptSet> = ids
            .iter()
            .map(|id| read_artifact(&pre_dir.join(format!("{id}.concepts"))).map(|t| concepts_from_text(&t)))
            .collect::<Result<_>>()?;
        let source = self.open_source()?;
        let cache = TripleCache::open(&self.cfg.cache_dir)?;
        let dir = self.dir("build");
        let misses: usize = ids
            .par_iter()
            .zip(&concept_sets)
            .map(|(id, concepts)| -> Result<usize> {
                let doc = build_document_graph(concepts, source.as_ref(), Some(&cache))?;
                let pruned = prune_graph(&doc.graph, &doc.concepts);
                write_artifact(&dir.join(format!("{id}.graph")), &pruned.to_text())?;
                write_artifact(&dir.join(format!("{id}.concepts")), &concepts_to_text(&doc.concepts))?;
                Ok(doc.misses.len())
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        log::info!("build: {} documents, {misses} concept lookups without triples", ids.len());
        Ok(())
    }

    fn aggregate(&self) -> Result<()> {
        let ids = self.doc_index()?;
        let build_dir = self.dir("build");
        let mut graphs = Vec::with_capacity(ids.len());
        let mut corpus = Vec::with_capacity(ids.len());
        for id in &ids {
            let g = KnowledgeGraph::from_text(&read_artifact(&build_dir.join(format!("{id}.graph")))?)?;
            let c = concepts_from_text(&read_artifact(&build_dir.join(format!("{id}.concepts")))?);
            graphs.push(g);
            corpus.push((id.clone(), c));
        }
        let agg = attach_essay_nodes(aggregate_graphs(&graphs), &corpus)?;
        let concepts: Vec<ConceptSet> = corpus.into_iter().map(|(_, c)| c).collect();
        let features = build_feature_matrix(&agg, &concepts, self.cfg.entity_features);

        let mut docs = read_corpus(&self.cfg.corpus)?;
        if let Some(labels) = &self.cfg.labels {
            attach_labels(&mut docs, labels)?;
        }
        let by_id: BTreeMap<&str, Option<TraitLabels>> = docs.iter().map(|d| (d.id.as_str(), d.labels)).collect();
        let labels: Vec<(String, TraitLabels)> = ids
            .iter()
            .map(|id| match by_id.get(id.as_str()) {
                Some(Some(l)) => Ok((id.clone(), *l)),
                _ => Err(AggregateError::MissingLabel(id.clone())),
            })
            .collect::<std::result::Result<_, _>>()?;

        let dir = self.dir("aggregate");
        write_artifact(&dir.join("graph.txt"), &agg.to_text())?;
        write_artifact(&dir.join("features.txt"), &features.to_text())?;
        write_artifact(&dir.join("labels.csv"), &write_label_csv(&labels))?;
        log::info!(
            "aggregate: {} entities, {} essays, {} edges",
            agg.entity_count(),
            agg.essay_count(),
            agg.edge_count()
        );
        Ok(())
    }

    pub fn load_aggregate(&self) -> Result<AggregateArtifacts> {
        let dir = self.dir("aggregate");
        let graph = AggregatedGraph::from_text(&read_artifact(&dir.join("graph.txt"))?)?;
        let features = FeatureMatrix::from_text(&read_artifact(&dir.join("features.txt"))?)?;
        let labels = read_label_csv(read_artifact(&dir.join("labels.csv"))?.as_bytes())?;
        if features.rows() != graph.node_count() || labels.len() != graph.essay_count() {
            return Err(PipelineError::Invalid("aggregate artifacts are inconsistent".into()));
        }
        Ok(AggregateArtifacts { graph, features, labels })
    }

    fn embed(&self) -> Result<()> {
        let graph = AggregatedGraph::from_text(&read_artifact(&self.dir("aggregate").join("graph.txt"))?)?;
        let walks = generate_walks(&graph.neighbors(), &self.cfg.walk_config())?;
        let outcome = train_skip_gram(&walks, graph.node_count(), &self.cfg.skip_gram_config())?;
        let ids: Vec<String> = graph
            .entities()
            .iter()
            .cloned()
            .chain(graph.essays().iter().map(|d| essay_embedding_id(d)))
            .collect();
        let matrix = EmbeddingMatrix::new(ids, outcome.vectors)?;
        let dir = self.dir("embed");
        write_artifact(&dir.join("embeddings.txt"), &matrix.to_text())?;
        let mut loss = String::from("epoch,loss\n");
        for (i, l) in outcome.epoch_loss.iter().enumerate() {
            writeln!(loss, "{},{l}", i + 1).unwrap();
        }
        write_artifact(&dir.join("loss.csv"), &loss)?;
        log::info!("embed: {} walks, final loss {:?}", walks.len(), outcome.epoch_loss.last());
        Ok(())
    }

    fn load_embeddings(&self, graph: &AggregatedGraph) -> Result<Option<EmbeddingMatrix>> {
        if !self.cfg.enriched {
            return Ok(None);
        }
        let m = EmbeddingMatrix::from_text(&read_artifact(&self.dir("embed").join("embeddings.txt"))?)?;
        let expected = graph.entities().iter().cloned().chain(graph.essays().iter().map(|d| essay_embedding_id(d)));
        if m.len() != graph.node_count() || !m.ids().iter().cloned().eq(expected) {
            return Err(PipelineError::Invalid("embeddings do not match the aggregated graph".into()));
        }
        Ok(Some(m))
    }

    /// Test-set positions (into the essay list) per fold.
    fn folds(&self, protocol: &str, essays: usize) -> Result<Vec<Vec<usize>>> {
        Ok(match protocol {
            "cv" => kfold_split(essays, self.cfg.folds, self.cfg.seed)?,
            _ => vec![holdout_split(essays, self.cfg.test_split, self.cfg.seed)?.1],
        })
    }

    fn train(&self) -> Result<()> {
        let art = self.load_aggregate()?;
        let embeddings = self.load_embeddings(&art.graph)?;
        let graph = AttentionGraph::from_aggregated(&art.graph);
        let inputs = GraphInputs::new(&graph, &art.features).with_embeddings(embeddings.as_ref());
        let n = art.graph.essay_count();
        for &protocol in self.cfg.protocol.runs() {
            let folds = self.folds(protocol, n)?;
            let dir = self.dir("train").join(self.mode()).join(protocol);
            let mut fold_csv = String::from("fold,doc_id\n");
            for (k, fold) in folds.iter().enumerate() {
                for &pos in fold {
                    writeln!(fold_csv, "{k},{}", art.labels[pos].0).unwrap();
                }
            }
            write_artifact(&dir.join("folds.csv"), &fold_csv)?;
            let jobs: Vec<(Trait, usize)> =
                Trait::ALL.iter().flat_map(|&t| (0..folds.len()).map(move |k| (t, k))).collect();
            jobs.par_iter().try_for_each(|&(t, k)| -> Result<()> {
                let test = &folds[k];
                let train: Vec<(usize, u8)> = (0..n)
                    .filter(|p| !test.contains(p))
                    .map(|p| (art.graph.essay_node(p), art.labels[p].1.get(t)))
                    .collect();
                let config = crate::gat::TrainConfig {
                    seed: job_seed(self.cfg.seed, t, k),
                    ..self.cfg.train_config(self.cfg.enriched)
                };
                let outcome = train_trait(&inputs, &train, &config)?;
                log::debug!("{protocol} {t} fold {k}: best epoch {}", outcome.best_epoch);
                let tdir = dir.join(t.name());
                write_artifact(&tdir.join(format!("fold{k}.ckpt")), &save_checkpoint(&outcome.model, &config))?;
                write_artifact(&tdir.join(format!("fold{k}.history.csv")), &history_csv(&outcome.history))
            })?;
        }
        Ok(())
    }

    fn evaluate(&self) -> Result<()> {
        let art = self.load_aggregate()?;
        let embeddings = self.load_embeddings(&art.graph)?;
        let graph = AttentionGraph::from_aggregated(&art.graph);
        let inputs = GraphInputs::new(&graph, &art.features).with_embeddings(embeddings.as_ref());
        let position: BTreeMap<&str, usize> =
            art.labels.iter().enumerate().map(|(i, (id, _))| (id.as_str(), i)).collect();
        let label_rows: Vec<TraitLabels> = art.labels.iter().map(|(_, l)| *l).collect();
        write_artifact(&self.dir("evaluate").join("correlations.csv"), &correlations_csv(&trait_correlations(&label_rows)?))?;

        for &protocol in self.cfg.protocol.runs() {
            let train_dir = self.dir("train").join(self.mode()).join(protocol);
            let fold_text = read_artifact(&train_dir.join("folds.csv"))?;
            let mut folds: Vec<Vec<usize>> = Vec::new();
            for line in fold_text.lines().skip(1) {
                let (k, id) = line
                    .split_once(',')
                    .ok_or_else(|| PipelineError::Invalid(format!("bad folds.csv line `{line}`")))?;
                let k: usize = k.parse().map_err(|_| PipelineError::Invalid(format!("bad fold `{k}`")))?;
                let pos = *position
                    .get(id)
                    .ok_or_else(|| PipelineError::Invalid(format!("unknown document `{id}` in folds.csv")))?;
                if folds.len() <= k {
                    folds.resize(k + 1, Vec::new());
                }
                folds[k].push(pos);
            }
            let mut predictions = String::from("doc_id,trait,fold,predicted,actual,p1\n");
            let mut counts = vec![[ConfusionCounts::default(); 5]; folds.len()];
            for t in Trait::ALL {
                for (k, fold) in folds.iter().enumerate() {
                    let ckpt = read_artifact(&train_dir.join(t.name()).join(format!("fold{k}.ckpt")))?;
                    let (model, _) = load_checkpoint(&ckpt)?;
                    let nodes: Vec<usize> = fold.iter().map(|&p| art.graph.essay_node(p)).collect();
                    let probs = model.probabilities(&inputs, &nodes)?;
                    let predicted: Vec<u8> = probs.iter().map(|p| crate::gat::predicted_class(*p)).collect();
                    let actual: Vec<u8> = fold.iter().map(|&p| art.labels[p].1.get(t)).collect();
                    counts[k][t.index()] = confusion_counts(&predicted, &actual)?;
                    for (i, &p) in fold.iter().enumerate() {
                        writeln!(
                            predictions,
                            "{},{t},{k},{},{},{:.6}",
                            art.labels[p].0, predicted[i], actual[i], probs[i][1]
                        )
                        .unwrap();
                    }
                }
            }
            let report = MetricReport::new(counts);
            let dir = self.dir("evaluate").join(self.mode()).join(protocol);
            write_artifact(&dir.join("metrics.csv"), &report.to_csv())?;
            write_artifact(&dir.join("metrics_long.csv"), &report.to_long_csv())?;
            write_artifact(&dir.join("predictions.csv"), &predictions)?;
            log::info!("evaluate {protocol}: {:?} mean accuracy", report.average(crate::eval::Metric::Accuracy).0);
        }
        Ok(())
    }

    fn write_manifest(&self, command: &str) -> Result<()> {
        let mut inputs = BTreeMap::new();
        let mut add = |name: &str, path: Option<&Path>| -> Result<()> {
            if let Some(p) = path.filter(|p| p.exists()) {
                inputs.insert(name.to_string(), sha256_file(p)?);
            }
            Ok(())
        };
        add("corpus", Some(&self.cfg.corpus))?;
        add("labels", self.cfg.labels.as_deref())?;
        add("stopwords", self.cfg.stopwords.as_deref())?;
        add("lemmas", self.cfg.lemmas.as_deref())?;
        add("gazetteer", self.cfg.gazetteer.as_deref())?;
        if let SourceSpec::Dump(p) = self.cfg.source()? {
            add("triple_dump", Some(&p))?;
        }
        let manifest = Manifest {
            tool: "kgatnet",
            version: env!("CARGO_PKG_VERSION"),
            command,
            mode: self.mode(),
            config: &self.cfg,
            inputs,
            substitutions: vec![
                "entity recognition uses a gazetteer with greedy longest match",
                "lemmatization uses a lookup table",
                "triples come from the configured dump or endpoint snapshot",
            ],
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| PipelineError::Invalid(e.to_string()))?;
        write_artifact(&self.cfg.output_dir.join("manifest.json"), &(json + "\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(PipelineError::Config(String::new()).exit_code(), 2);
        assert_eq!(PipelineError::MissingStageInput(PathBuf::new()).exit_code(), 3);
        assert_eq!(PipelineError::from(KgError::Network(String::new())).exit_code(), 4);
        assert_eq!(PipelineError::from(GatError::NonFiniteLoss).exit_code(), 5);
        assert_eq!(PipelineError::from(Rdf2VecError::NonFinite(1)).exit_code(), 5);
        assert_eq!(PipelineError::Invalid(String::new()).exit_code(), 1);
    }

    #[test]
    fn missing_artifact_is_named() {
        let err = read_artifact(Path::new("/nonexistent/aggregate/graph.txt")).unwrap_err();
        assert!(matches!(&err, PipelineError::MissingStageInput(p) if p.ends_with("graph.txt")));
        assert!(err.to_string().contains("aggregate/graph.txt"));
    }

    #[test]
    fn job_seeds_are_distinct() {
        let mut seeds: Vec<u64> =
            Trait::ALL.iter().flat_map(|&t| (0..10).map(move |k| job_seed(42, t, k))).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 50);
    }
}
