use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::{ntriples, KgError, RdfTriple, TripleCache, TripleSet};

/// Anything that can return the triples mentioning a resource.
pub trait TripleSource: Send + Sync {
    /// Stable identifier used to key cache entries.
    fn source_id(&self) -> &str;

    /// IRI prefix that turns a concept name into a resource IRI.
    fn resource_prefix(&self) -> &str;

    /// All triples in which `iri` is the subject or the object. An unknown
    /// resource yields an empty set, not an error.
    fn fetch(&self, iri: &str) -> Result<TripleSet, KgError>;
}

/// Predicate namespace allowlist. Empty means every predicate passes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredicateFilter {
    prefixes: Vec<String>,
}

impl PredicateFilter {
    pub fn new(prefixes: Vec<String>) -> Self {
        Self { prefixes }
    }

    pub fn allows(&self, predicate: &str) -> bool {
        self.prefixes.is_empty() || self.prefixes.iter().any(|p| predicate.starts_with(p))
    }

    pub fn prefixes(&self) -> &[String] {
        &self.prefixes
    }

    fn digest_input(&self) -> String {
        self.prefixes.join("\n")
    }
}

/// Resolved description of one concept.
#[derive(Debug, Clone, PartialEq)]
pub struct Description {
    /// Local resource name that produced the triples (the concept itself,
    /// or its title-cased variant when the first lookup missed).
    pub resource: String,
    pub triples: TripleSet,
}

/// `New_york` becomes `New_York`.
pub fn title_case(concept: &str) -> String {
    concept
        .split('_')
        .map(|part| {
            let mut chars = part.chars();
            match chars.next() {
                Some(c) => c.to_uppercase().chain(chars).collect(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join("_")
}

/// Fetches a concept's description, retrying with the title-cased name on a
/// miss. With a cache, each looked-up name is served from and stored to it.
pub fn describe_resource(
    concept: &str,
    source: &dyn TripleSource,
    cache: Option<&TripleCache>,
) -> Result<Description, KgError> {
    let first = lookup(concept, source, cache)?;
    if !first.is_empty() {
        return Ok(Description { resource: concept.to_string(), triples: first });
    }
    let retry = title_case(concept);
    if retry != concept {
        let second = lookup(&retry, source, cache)?;
        if !second.is_empty() {
            return Ok(Description { resource: retry, triples: second });
        }
    }
    Ok(Description { resource: concept.to_string(), triples: TripleSet::new() })
}

fn lookup(
    name: &str,
    source: &dyn TripleSource,
    cache: Option<&TripleCache>,
) -> Result<TripleSet, KgError> {
    if let Some(cache) = cache {
        match cache.get(name, source.source_id()) {
            Ok(hit) => return Ok(hit),
            Err(KgError::CacheMiss) => {}
            Err(e) => return Err(e),
        }
    }
    let iri = format!("{}{}", source.resource_prefix(), name);
    let triples = source.fetch(&iri)?;
    if let Some(cache) = cache {
        cache.put(name, source.source_id(), &triples)?;
    }
    Ok(triples)
}

/// Offline source backed by an N-Triples dump held in memory.
#[derive(Debug)]
pub struct DumpSource {
    id: String,
    prefix: String,
    triples: Vec<RdfTriple>,
    by_resource: HashMap<String, Vec<usize>>,
}

impl DumpSource {
    /// Loads a dump. The source id is derived from the file contents and
    /// the predicate filter, so cached lookups follow dump edits.
    pub fn load(path: &Path, prefix: &str, filter: &PredicateFilter) -> Result<Self, KgError> {
        let bytes = std::fs::read(path)?;
        let mut triples = TripleSet::new();
        ntriples::read_with(bytes.as_slice(), |t| {
            if filter.allows(&t.predicate) {
                triples.insert(t);
            }
        })?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        hasher.update(filter.digest_input().as_bytes());
        let id = format!("dump:{}", &hex::encode(hasher.finalize())[..16]);
        Ok(Self::build(id, triples, prefix))
    }

    pub fn from_triples(triples: TripleSet, prefix: &str) -> Self {
        Self::build("memory".to_string(), triples, prefix)
    }

    fn build(id: String, triples: TripleSet, prefix: &str) -> Self {
        let triples: Vec<RdfTriple> = triples.into_iter().collect();
        let mut by_resource: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, t) in triples.iter().enumerate() {
            by_resource.entry(t.subject.clone()).or_default().push(i);
            if t.object != t.subject {
                by_resource.entry(t.object.clone()).or_default().push(i);
            }
        }
        Self { id, prefix: prefix.to_string(), triples, by_resource }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Local names of all resources under the prefix, sorted.
    pub fn resource_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self
            .by_resource
            .keys()
            .filter_map(|iri| iri.strip_prefix(self.prefix.as_str()))
            .filter(|n| !n.is_empty())
            .collect();
        names.sort_unstable();
        names
    }
}

impl TripleSource for DumpSource {
    fn source_id(&self) -> &str {
        &self.id
    }

    fn resource_prefix(&self) -> &str {
        &self.prefix
    }

    fn fetch(&self, iri: &str) -> Result<TripleSet, KgError> {
        Ok(self
            .by_resource
            .get(iri)
            .map(|idx| idx.iter().map(|&i| self.triples[i].clone()).collect())
            .unwrap_or_default())
    }
}

#[derive(Debug, Clone)]
pub struct SparqlConfig {
    pub endpoint: String,
    pub resource_prefix: String,
    pub filter: PredicateFilter,
    pub timeout: Duration,
    pub retries: u32,
    /// Minimum spacing between consecutive requests.
    pub min_interval: Duration,
}

impl SparqlConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            resource_prefix: "http://dbpedia.org/resource/".to_string(),
            filter: PredicateFilter::default(),
            timeout: Duration::from_secs(30),
            retries: 3,
            min_interval: Duration::from_millis(100),
        }
    }
}

/// Remote SPARQL-protocol endpoint queried with describe-style SELECTs.
pub struct SparqlSource {
    id: String,
    config: SparqlConfig,
    client: reqwest::blocking::Client,
    last_request: Mutex<Option<Instant>>,
}

#[derive(Deserialize)]
struct SelectResults {
    results: Bindings,
}

#[derive(Deserialize)]
struct Bindings {
    bindings: Vec<HashMap<String, BoundTerm>>,
}

#[derive(Deserialize)]
struct BoundTerm {
    #[serde(rename = "type")]
    kind: String,
    value: String,
}

impl SparqlSource {
    pub fn new(config: SparqlConfig) -> Result<Self, KgError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .user_agent(concat!("kgatnet/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| KgError::Network(e.to_string()))?;
        let id = format!(
            "sparql:{}",
            short_digest(&format!("{}\n{}", config.endpoint, config.filter.digest_input()))
        );
        Ok(Self { id, config, client, last_request: Mutex::new(None) })
    }

    /// SELECT returning every `(s, p, o)` with the resource on either side.
    pub fn describe_query(&self, iri: &str) -> String {
        let mut filters = vec!["isIRI(?s) && isIRI(?o)".to_string()];
        let prefixes = self.config.filter.prefixes();
        if !prefixes.is_empty() {
            let any = prefixes
                .iter()
                .map(|p| format!("STRSTARTS(STR(?p), \"{}\")", p.replace('"', "\\\"")))
                .collect::<Vec<_>>()
                .join(" || ");
            filters.push(format!("({any})"));
        }
        format!(
            "SELECT ?s ?p ?o WHERE {{ {{ <{iri}> ?p ?o . BIND(<{iri}> AS ?s) }} UNION \
             {{ ?s ?p <{iri}> . BIND(<{iri}> AS ?o) }} FILTER({}) }}",
            filters.join(" && ")
        )
    }

    fn throttle(&self) {
        let mut last = self.last_request.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(prev) = *last {
            let since = prev.elapsed();
            if since < self.config.min_interval {
                std::thread::sleep(self.config.min_interval - since);
            }
        }
        *last = Some(Instant::now());
    }

    fn request(&self, query: &str) -> Result<SelectResults, RequestError> {
        self.throttle();
        let url = reqwest::Url::parse_with_params(&self.config.endpoint, &[("query", query)])
            .map_err(|e| RequestError::Fatal(e.to_string()))?;
        let resp = self
            .client
            .get(url)
            .header(reqwest::header::ACCEPT, "application/sparql-results+json")
            .send()
            .map_err(|e| RequestError::Transient(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(RequestError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(RequestError::Fatal(format!("HTTP {status}")));
        }
        let body = resp.text().map_err(|e| RequestError::Transient(e.to_string()))?;
        serde_json::from_str(&body).map_err(|e| RequestError::Fatal(format!("bad response: {e}")))
    }
}

enum RequestError {
    Transient(String),
    Fatal(String),
}

impl TripleSource for SparqlSource {
    fn source_id(&self) -> &str {
        &self.id
    }

    fn resource_prefix(&self) -> &str {
        &self.config.resource_prefix
    }

    fn fetch(&self, iri: &str) -> Result<TripleSet, KgError> {
        let query = self.describe_query(iri);
        let mut attempt = 0;
        let results = loop {
            match self.request(&query) {
                Ok(r) => break r,
                Err(RequestError::Fatal(msg)) => return Err(KgError::Network(msg)),
                Err(RequestError::Transient(msg)) => {
                    if attempt >= self.config.retries {
                        return Err(KgError::Network(format!(
                            "{msg} (after {} attempts)",
                            attempt + 1
                        )));
                    }
                    log::warn!("SPARQL request failed ({msg}), retrying");
                    std::thread::sleep(Duration::from_millis(200 << attempt.min(5)));
                    attempt += 1;
                }
            }
        };
        let mut set = TripleSet::new();
        for row in results.results.bindings {
            let (Some(s), Some(p), Some(o)) = (row.get("s"), row.get("p"), row.get("o")) else {
                continue;
            };
            if s.kind != "uri" || o.kind != "uri" || !self.config.filter.allows(&p.value) {
                continue;
            }
            if let Ok(t) = RdfTriple::new(s.value.clone(), p.value.clone(), o.value.clone()) {
                set.insert(t);
            }
        }
        Ok(set)
    }
}

fn short_digest(input: &str) -> String {
    hex::encode(&Sha256::digest(input.as_bytes())[..8])
}
