//! N-Triples reading and canonical writing.
//!
//! Only resource-to-resource statements are kept: triples with a literal or
//! blank-node object (or a blank-node subject) are discarded on read.

use std::io::{BufRead, Write};

use rio_api::model::{NamedNode, Subject, Term, Triple};
use rio_api::parser::TriplesParser;
use rio_turtle::{NTriplesParser, TurtleError};

use super::{KgError, RdfTriple, TripleSet};

/// Parses N-Triples from `reader`, calling `sink` for every kept triple.
pub fn read_with<R: BufRead>(
    reader: R,
    mut sink: impl FnMut(RdfTriple),
) -> Result<(), KgError> {
    let mut parser = NTriplesParser::new(reader);
    parser
        .parse_all(&mut |t: Triple<'_>| -> Result<(), TurtleError> {
            let subject = match t.subject {
                Subject::NamedNode(n) => n.iri,
                _ => return Ok(()),
            };
            let object = match t.object {
                Term::NamedNode(n) => n.iri,
                _ => return Ok(()),
            };
            if let Ok(triple) = RdfTriple::new(subject, t.predicate.iri, object) {
                sink(triple);
            }
            Ok(())
        })
        .map_err(|e| KgError::Parse(e.to_string()))
}

pub fn read<R: BufRead>(reader: R) -> Result<TripleSet, KgError> {
    let mut set = TripleSet::new();
    read_with(reader, |t| {
        set.insert(t);
    })?;
    Ok(set)
}

pub fn parse_str(text: &str) -> Result<TripleSet, KgError> {
    read(text.as_bytes())
}

/// Writes one `<s> <p> <o> .` line per triple in set order.
pub fn write<W: Write>(mut out: W, triples: &TripleSet) -> std::io::Result<()> {
    for t in triples {
        let triple = Triple {
            subject: NamedNode { iri: &t.subject }.into(),
            predicate: NamedNode { iri: &t.predicate },
            object: NamedNode { iri: &t.object }.into(),
        };
        writeln!(out, "{triple} .")?;
    }
    Ok(())
}

pub fn to_string(triples: &TripleSet) -> String {
    let mut buf = Vec::new();
    write(&mut buf, triples).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("N-Triples output is UTF-8")
}
