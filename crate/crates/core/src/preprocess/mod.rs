//! Text preprocessing: raw document text to a deduplicated set of
//! lookup-ready concept identifiers.
//!
//! The stages run in order: [`tokenize`], [`remove_noise`], [`normalize`],
//! [`EntityRecognizer::recognize`] and [`finalize_concept_set`].
//! [`Preprocessor`] bundles the resources and runs the whole chain.

mod lexicon;
mod tokenizer;

use std::collections::{BTreeSet, HashSet};

pub use lexicon::{Gazetteer, LemmaTable, StopwordList};
pub use tokenizer::{is_punctuation, tokenize};

use crate::aggregator::TraitLabels;

/// One input document.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub labels: Option<TraitLabels>,
}

/// Canonical concept identifiers for one document, sorted.
pub type ConceptSet = BTreeSet<String>;

/// Drops punctuation/sign tokens and stopwords (case-insensitive).
pub fn remove_noise(tokens: &[String], stopwords: &StopwordList) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| !is_punctuation(t) && !stopwords.contains(t))
        .cloned()
        .collect()
}

/// Lowercases every token and maps it through the lemma table.
pub fn normalize(tokens: &[String], lemmas: &LemmaTable) -> Vec<String> {
    tokens
        .iter()
        .map(|t| lemmas.lemma(&t.to_lowercase()).to_string())
        .collect()
}

/// Finds entity mentions in a normalized token sequence.
///
/// Implementations return every mention in text order; multiword mentions
/// are joined with single spaces.
pub trait EntityRecognizer {
    fn recognize(&self, tokens: &[String]) -> Vec<String>;
}

impl EntityRecognizer for Gazetteer {
    /// Greedy left-to-right longest match over multiword entries; every
    /// token not covered by a multiword match is emitted on its own.
    fn recognize(&self, tokens: &[String]) -> Vec<String> {
        let mut mentions = Vec::with_capacity(tokens.len());
        let mut i = 0;
        while i < tokens.len() {
            let longest = (2..=self.max_len().min(tokens.len() - i))
                .rev()
                .find(|&len| self.contains(&tokens[i..i + len]));
            match longest {
                Some(len) => {
                    mentions.push(tokens[i..i + len].join(" "));
                    i += len;
                }
                None => {
                    mentions.push(tokens[i].clone());
                    i += 1;
                }
            }
        }
        mentions
    }
}

/// Deduplicates mentions case-insensitively, uppercases the first
/// character and replaces each internal whitespace run with `_`.
pub fn finalize_concept_set<S: AsRef<str>>(mentions: &[S]) -> ConceptSet {
    mentions
        .iter()
        .filter_map(|m| canonical_concept(m.as_ref()))
        .collect()
}

fn canonical_concept(mention: &str) -> Option<String> {
    let lowered = mention.to_lowercase();
    let joined = lowered.split_whitespace().collect::<Vec<_>>().join("_");
    let mut chars = joined.chars();
    let first = chars.next()?;
    Some(first.to_uppercase().chain(chars).collect())
}

/// All preprocessing resources in one place.
#[derive(Debug, Clone, Default)]
pub struct Preprocessor {
    pub stopwords: StopwordList,
    pub lemmas: LemmaTable,
    pub gazetteer: Gazetteer,
}

impl Preprocessor {
    /// Builds a preprocessor with the bundled stopword list and lemma table
    /// and the given gazetteer. Gazetteer entries are normalized with the
    /// same lemma table applied to document tokens.
    pub fn with_gazetteer(raw_entries: impl IntoIterator<Item = String>) -> Self {
        let lemmas = LemmaTable::bundled();
        let gazetteer = Gazetteer::from_entries(raw_entries, &lemmas);
        Self { stopwords: StopwordList::bundled(), lemmas, gazetteer }
    }

    pub fn concepts(&self, text: &str) -> ConceptSet {
        let tokens = tokenize(text);
        let kept = remove_noise(&tokens, &self.stopwords);
        let normalized = normalize(&kept, &self.lemmas);
        let mentions = self.gazetteer.recognize(&normalized);
        finalize_concept_set(&mentions)
    }
}

/// Case-folded view of a concept set, used where lookups should ignore the
/// capitalization chosen during resolution.
pub fn folded(concepts: &ConceptSet) -> HashSet<String> {
    concepts.iter().map(|c| c.to_lowercase()).collect()
}
