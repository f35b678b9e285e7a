use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::aggregator::EntityFeatures;
use crate::gat::TrainConfig;
use crate::kg::{PredicateFilter, SparqlConfig};
use crate::rdf2vec::{SkipGramConfig, WalkConfig};

/// Where triples come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceSpec {
    Dump(PathBuf),
    Endpoint(String),
}

/// Evaluation protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// k-fold cross validation.
    Cv,
    /// Single seeded train/test split.
    Split,
    Both,
}

impl Protocol {
    pub fn runs(self) -> &'static [&'static str] {
        match self {
            Protocol::Cv => &["cv"],
            Protocol::Split => &["split"],
            Protocol::Both => &["cv", "split"],
        }
    }
}

/// Flat TOML configuration. Relative paths are resolved against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// `doc_id,text` CSV, or the essays CSV with `#AUTHID` and `c*` columns.
    pub corpus: PathBuf,
    /// `doc_id,O,C,E,A,N` CSV; optional when the corpus carries labels.
    pub labels: Option<PathBuf>,
    /// `dump:<path>` or `endpoint:<url>`.
    pub triple_source: String,
    pub resource_prefix: String,
    pub predicate_allowlist: Vec<String>,
    pub cache_dir: PathBuf,
    pub stopwords: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub jobs: usize,
    pub entity_features: EntityFeatures,

    pub protocol: Protocol,
    pub folds: usize,
    pub test_split: f64,

    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub patience: usize,
    pub validation_split: f64,
    pub heads: usize,
    pub hidden_units: usize,
    pub dense_units: usize,
    pub layers: usize,
    pub enriched: bool,

    pub walk_depth: usize,
    pub walks_per_node: usize,
    pub distinct_walks: bool,
    pub embedding_dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub sg_epochs: usize,
    pub sg_learning_rate: f64,

    pub endpoint_timeout_secs: u64,
    pub endpoint_retries: u32,
    pub endpoint_interval_ms: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        let sg = SkipGramConfig::default();
        let walks = WalkConfig::default();
        Self {
            corpus: PathBuf::new(),
            labels: None,
            triple_source: String::new(),
            resource_prefix: "http://dbpedia.org/resource/".into(),
            predicate_allowlist: Vec::new(),
            cache_dir: PathBuf::from("cache"),
            stopwords: None,
            lemmas: None,
            gazetteer: None,
            output_dir: PathBuf::from("out"),
            seed: train.seed,
            jobs: 0,
            entity_features: EntityFeatures::default(),
            protocol: Protocol::Both,
            folds: 10,
            test_split: 0.2,
            epochs: train.epochs,
            batch_size: train.batch_size,
            learning_rate: train.learning_rate,
            patience: train.patience,
            validation_split: train.validation_split,
            heads: train.heads,
            hidden_units: train.hidden_units,
            dense_units: train.dense_units,
            layers: train.layers,
            enriched: train.enriched,
            walk_depth: walks.max_depth,
            walks_per_node: walks.walks_per_node,
            distinct_walks: walks.distinct,
            embedding_dim: sg.dim,
            window: sg.window,
            negatives: sg.negatives,
            sg_epochs: sg.epochs,
            sg_learning_rate: sg.learning_rate,
            endpoint_timeout_secs: 30,
            endpoint_retries: 3,
            endpoint_interval_ms: 100,
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() && !p.as_os_str().is_empty() {
        *p = base.join(&*p);
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Reads and validates a config file, resolving relative paths.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.corpus);
        resolve(base, &mut self.cache_dir);
        resolve(base, &mut self.output_dir);
        for p in [&mut self.labels, &mut self.stopwords, &mut self.lemmas, &mut self.gazetteer]
            .into_iter()
            .flatten()
        {
            resolve(base, p);
        }
        if let Some(rest) = self.triple_source.strip_prefix("dump:") {
            let mut p = PathBuf::from(rest);
            resolve(base, &mut p);
            self.triple_source = format!("dump:{}", p.display());
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        if self.corpus.as_os_str().is_empty() {
            return bad("`corpus` is required");
        }
        self.source()?;
        if self.folds < 2 {
            return bad("`folds` must be at least 2");
        }
        if !(self.test_split > 0.0 && self.test_split < 1.0) {
            return bad("`test_split` must lie in (0, 1)");
        }
        if self.walk_depth == 0 || self.walks_per_node == 0 || self.embedding_dim == 0 {
            return bad("walk and embedding sizes must be positive");
        }
        if self.window == 0 || self.sg_epochs == 0 || !(self.sg_learning_rate > 0.0) {
            return bad("skip-gram window, epochs and learning rate must be positive");
        }
        self.train_config(self.enriched).validate().map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn source(&self) -> Result<SourceSpec, PipelineError> {
        if let Some(p) = self.triple_source.strip_prefix("dump:") {
            Ok(SourceSpec::Dump(PathBuf::from(p)))
        } else if let Some(u) = self.triple_source.strip_prefix("endpoint:") {
            Ok(SourceSpec::Endpoint(u.to_string()))
        } else {
            Err(PipelineError::Config(format!(
                "`triple_source` must start with `dump:` or `endpoint:`, got `{}`",
                self.triple_source
            )))
        }
    }

    pub fn filter(&self) -> PredicateFilter {
        PredicateFilter::new(self.predicate_allowlist.clone())
    }

    pub fn sparql_config(&self, endpoint: &str) -> SparqlConfig {
        SparqlConfig {
            resource_prefix: self.resource_prefix.clone(),
            filter: self.filter(),
            timeout: Duration::from_secs(self.endpoint_timeout_secs),
            retries: self.endpoint_retries,
            min_interval: Duration::from_millis(self.endpoint_interval_ms),
            ..SparqlConfig::new(endpoint)
        }
    }

    pub fn train_config(&self, enriched: bool) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            patience: self.patience,
            validation_split: self.validation_split,
            heads: self.heads,
            hidden_units: self.hidden_units,
            dense_units: self.dense_units,
            layers: self.layers,
            seed: self.seed,
            enriched,
        }
    }

    pub fn walk_config(&self) -> WalkConfig {
        WalkConfig {
            max_depth: self.walk_depth,
            walks_per_node: self.walks_per_node,
            seed: self.seed,
            distinct: self.distinct_walks,
        }
    }

    pub fn skip_gram_config(&self) -> SkipGramConfig {
        SkipGramConfig {
            dim: self.embedding_dim,
            window: self.window,
            negatives: self.negatives,
            epochs: self.sg_epochs,
            learning_rate: self.sg_learning_rate,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_reference_settings() {
        let cfg = PipelineConfig::parse("corpus = \"c.csv\"\ntriple_source = \"dump:t.nt\"\n").unwrap();
        assert_eq!((cfg.epochs, cfg.batch_size, cfg.patience), (50, 32, 10));
        assert_eq!((cfg.heads, cfg.hidden_units, cfg.dense_units, cfg.layers), (8, 128, 128, 5));
        assert_eq!(cfg.learning_rate, 3e-4);
        assert_eq!((cfg.folds, cfg.test_split), (10, 0.2));
        assert_eq!((cfg.walk_depth, cfg.walks_per_node, cfg.embedding_dim), (5, 5, 500));
        cfg.validate().unwrap();
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let mut cfg =
            PipelineConfig::parse("corpus = \"c.csv\"\ntriple_source = \"dump:t.nt\"\nlabels = \"/abs/l.csv\"\n")
                .unwrap();
        cfg.resolve_paths(Path::new("/data/run"));
        assert_eq!(cfg.corpus, PathBuf::from("/data/run/c.csv"));
        assert_eq!(cfg.labels, Some(PathBuf::from("/abs/l.csv")));
        assert_eq!(cfg.source().unwrap(), SourceSpec::Dump("/data/run/t.nt".into()));
        assert_eq!(cfg.output_dir, PathBuf::from("/data/run/out"));
    }

    #[test]
    fn bad_configs_rejected() {
        assert!(PipelineConfig::parse("unknown_key = 1").is_err());
        let cfg = PipelineConfig::parse("corpus = \"c\"\ntriple_source = \"ftp:x\"").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = PipelineConfig::parse("corpus = \"c\"\ntriple_source = \"dump:x\"\npatience = 0").unwrap();
        assert!(cfg.validate().is_err());
        let cfg = PipelineConfig::parse("triple_source = \"dump:x\"").unwrap();
        assert!(cfg.validate().is_err());
    }
}
