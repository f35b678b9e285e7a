use std::collections::{HashMap, HashSet};
use std::path::Path;

const BUNDLED_STOPWORDS: &str = include_str!("../../resources/stopwords.txt");
const BUNDLED_LEMMAS: &str = include_str!("../../resources/lemmas.tsv");

/// Lowercase stopword set. Lookups are case-insensitive.
#[derive(Debug, Clone, Default)]
pub struct StopwordList {
    words: HashSet<String>,
}

impl StopwordList {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_STOPWORDS)
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self { words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect() }
    }

    /// One token per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        Self::from_words(content_lines(text))
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(&token.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Surface form to lemma dictionary; absent forms map to themselves.
#[derive(Debug, Clone, Default)]
pub struct LemmaTable {
    map: HashMap<String, String>,
}

impl LemmaTable {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_LEMMAS)
    }

    /// Tab-separated `surface<TAB>lemma` lines. Lines without a tab are ignored.
    pub fn parse(text: &str) -> Self {
        let map = content_lines(text)
            .filter_map(|line| {
                let (surface, lemma) = line.split_once('\t')?;
                Some((surface.trim().to_lowercase(), lemma.trim().to_lowercase()))
            })
            .collect();
        Self { map }
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    /// Adds entries from `other`, overriding existing surfaces.
    pub fn extend(&mut self, other: LemmaTable) {
        self.map.extend(other.map);
    }

    pub fn lemma<'a>(&'a self, token: &'a str) -> &'a str {
        self.map.get(token).map(String::as_str).unwrap_or(token)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Multiword entity lexicon, stored as normalized token sequences.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: HashSet<Vec<String>>,
    max_len: usize,
}

impl Gazetteer {
    /// Normalizes each entry (lowercase + lemma per word) before storing it.
    pub fn from_entries(entries: impl IntoIterator<Item = String>, lemmas: &LemmaTable) -> Self {
        let mut gaz = Self::default();
        for entry in entries {
            let words: Vec<String> = entry
                .split_whitespace()
                .map(|w| lemmas.lemma(&w.to_lowercase()).to_string())
                .collect();
            if words.is_empty() {
                continue;
            }
            gaz.max_len = gaz.max_len.max(words.len());
            gaz.entries.insert(words);
        }
        gaz
    }

    /// One entry per line, words separated by spaces.
    pub fn parse(text: &str, lemmas: &LemmaTable) -> Self {
        Self::from_entries(content_lines(text).map(String::from), lemmas)
    }

    pub fn load(path: &Path, lemmas: &LemmaTable) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?, lemmas))
    }

    /// Derives entries from resource local names (`New_York` gives
    /// `new york`). Single-word names are kept too, though only multiword
    /// entries change recognition output.
    pub fn from_resource_names<'a>(
        names: impl IntoIterator<Item = &'a str>,
        lemmas: &LemmaTable,
    ) -> Self {
        Self::from_entries(names.into_iter().map(|n| n.replace('_', " ")), lemmas)
    }

    pub fn contains(&self, words: &[String]) -> bool {
        self.entries.contains(words)
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_resources_load() {
        let stop = StopwordList::bundled();
        assert!(stop.contains("The"));
        assert!(stop.contains("'s"));
        assert!(!stop.contains("dog"));
        let lemmas = LemmaTable::bundled();
        assert_eq!(lemmas.lemma("dogs"), "dog");
        assert_eq!(lemmas.lemma("running"), "run");
        assert_eq!(lemmas.lemma("went"), "go");
    }

    #[test]
    fn lemma_file_format() {
        let t = LemmaTable::parse("mice\tmouse\n# comment\nbogus line\nGeese\tgoose\n");
        assert_eq!(t.len(), 2);
        assert_eq!(t.lemma("geese"), "goose");
        assert_eq!(t.lemma("cats"), "cats");
    }

    #[test]
    fn gazetteer_from_resources() {
        let g = Gazetteer::from_resource_names(["New_York", "Dog"], &LemmaTable::default());
        assert!(g.contains(&["new".to_string(), "york".to_string()]));
        assert_eq!(g.max_len(), 2);
    }
}
