use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use super::PipelineError;
use crate::aggregator::{read_label_csv, TraitLabels};
use crate::preprocess::Document;

/// Columns of the essays CSV holding y/n labels, in O C E A N order.
const ESSAY_LABEL_COLUMNS: [&str; 5] = ["cOPN", "cCON", "cEXT", "cAGR", "cNEU"];

/// Document ids become file names, so they are restricted to a safe set.
pub fn check_doc_id(id: &str) -> Result<(), PipelineError> {
    let ok = !id.is_empty()
        && id != "."
        && id != ".."
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(PipelineError::Invalid(format!(
            "document id `{id}` must be non-empty and use only ASCII letters, digits, `_`, `-` and `.`"
        )))
    }
}

/// Reads a `doc_id,text` CSV, or the essays CSV (`#AUTHID`, `TEXT` and
/// `cEXT`-style y/n columns) with labels included.
pub fn read_corpus(path: &Path) -> Result<Vec<Document>, PipelineError> {
    let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let bad = |m: String| PipelineError::Invalid(format!("{}: {m}", path.display()));
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let essays = col("#AUTHID").zip(col("TEXT"));
    let label_cols: Option<Vec<usize>> = ESSAY_LABEL_COLUMNS.iter().map(|c| col(c)).collect();
    let mut docs = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let doc = if let Some((id_col, text_col)) = essays {
            let labels = match &label_cols {
                Some(cols) => {
                    let cells: Vec<&str> = cols.iter().map(|&c| record.get(c).unwrap_or("")).collect();
                    Some(TraitLabels::parse_cells(&cells).ok_or_else(|| bad(format!("bad labels in {record:?}")))?)
                }
                None => None,
            };
            let id = record.get(id_col).unwrap_or("").trim().to_string();
            Document { id, text: record.get(text_col).unwrap_or("").to_string(), labels }
        } else {
            if record.len() < 2 {
                return Err(bad("expected `doc_id,text` rows".into()));
            }
            Document { id: record[0].trim().to_string(), text: record[1].to_string(), labels: None }
        };
        check_doc_id(&doc.id)?;
        docs.push(doc);
    }
    Ok(docs)
}

/// Fills document labels from a label CSV; rows for unknown ids are ignored.
pub fn attach_labels(docs: &mut [Document], path: &Path) -> Result<(), PipelineError> {
    let file = File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let table: HashMap<String, TraitLabels> = read_label_csv(file)?.into_iter().collect();
    for d in docs {
        if let Some(l) = table.get(&d.id) {
            d.labels = Some(*l);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn plain_and_essays_formats() {
        let dir = tempfile::tempdir().unwrap();
        let plain = dir.path().join("c.csv");
        std::fs::write(&plain, "doc_id,text\na1,\"Hello, world\"\nb-2,second\n").unwrap();
        let docs = read_corpus(&plain).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].text, "Hello, world");
        assert_eq!(docs[1].labels, None);

        let essays = dir.path().join("essays.csv");
        let mut f = File::create(&essays).unwrap();
        writeln!(f, "#AUTHID,TEXT,cEXT,cNEU,cAGR,cCON,cOPN").unwrap();
        writeln!(f, "1997_1.txt,\"some text\",y,n,y,n,y").unwrap();
        drop(f);
        let docs = read_corpus(&essays).unwrap();
        assert_eq!(docs[0].id, "1997_1.txt");
        assert_eq!(docs[0].labels, Some(TraitLabels([1, 0, 1, 1, 0])));
    }

    #[test]
    fn unsafe_ids_rejected() {
        assert!(check_doc_id("../x").is_err());
        assert!(check_doc_id("a b").is_err());
        assert!(check_doc_id("").is_err());
        assert!(check_doc_id("doc_01.txt").is_ok());
    }

    #[test]
    fn labels_from_separate_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("l.csv");
        std::fs::write(&path, "doc_id,O,C,E,A,N\na,1,0,1,0,1\n").unwrap();
        let mut docs = vec![
            Document { id: "a".into(), text: String::new(), labels: None },
            Document { id: "b".into(), text: String::new(), labels: None },
        ];
        attach_labels(&mut docs, &path).unwrap();
        assert_eq!(docs[0].labels, Some(TraitLabels([1, 0, 1, 0, 1])));
        assert_eq!(docs[1].labels, None);
    }
}
