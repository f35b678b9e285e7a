use std::io::{BufReader, ErrorKind, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{ntriples, KgError, TripleSet};

/// On-disk triple cache, one N-Triples file per (source, concept) key.
///
/// An empty file is a cached miss. Writes go through a temporary file and
/// an atomic rename, so concurrent writers of the same key leave one
/// complete entry (last write wins).
#[derive(Debug, Clone)]
pub struct TripleCache {
    dir: PathBuf,
}

impl TripleCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, KgError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, concept: &str, source_id: &str) -> PathBuf {
        let key = Sha256::digest(format!("{source_id}\n{concept}").as_bytes());
        self.dir.join(format!("{}.nt", hex::encode(key)))
    }

    pub fn get(&self, concept: &str, source_id: &str) -> Result<TripleSet, KgError> {
        match std::fs::File::open(self.entry_path(concept, source_id)) {
            Ok(f) => ntriples::read(BufReader::new(f)),
            Err(e) if e.kind() == ErrorKind::NotFound => Err(KgError::CacheMiss),
            Err(e) => Err(e.into()),
        }
    }

    pub fn put(&self, concept: &str, source_id: &str, triples: &TripleSet) -> Result<(), KgError> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        ntriples::write(&mut tmp, triples)?;
        tmp.flush()?;
        tmp.persist(self.entry_path(concept, source_id)).map_err(|e| e.error)?;
        Ok(())
    }
}
