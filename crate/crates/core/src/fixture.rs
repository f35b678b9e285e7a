//! Synthetic labelled corpus with a matching triple dump.
//!
//! Every trait has two positive and two negative marker entities. Each
//! document mentions both markers of the pole given by its label, plus a
//! few filler entities; one document per trait mentions the wrong pole, so
//! the best attainable accuracy is 29/30. In the structural variant about
//! half of the marker mentions are replaced by an associate entity that is
//! linked to the markers only through the triple dump.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aggregator::{write_label_csv, TraitLabels};

pub const RESOURCE_PREFIX: &str = "http://dbpedia.org/resource/";
const ONTOLOGY: &str = "http://dbpedia.org/ontology/";

/// `(positive, negative)` marker resources per trait, O C E A N.
pub const MARKERS: [([&str; 2], [&str; 2]); 5] = [
    (["Modern_art", "Poetry"], ["Routine", "Paperwork"]),
    (["Schedule", "Checklist"], ["Clutter", "Junk"]),
    (["Party", "Festival"], ["Solitude", "Diary"]),
    (["Charity", "Donation"], ["Argument", "Insult"]),
    (["Anxiety", "Insomnia"], ["Meditation", "Yoga"]),
];

/// Associates of each marker pair, in `MARKERS` order (positive then
/// negative).
const ASSOCIATES: [[&str; 3]; 10] = [
    ["Sculpture", "Opera", "Gallery"],
    ["Commute", "Laundry", "Spreadsheet"],
    ["Calendar", "Budget", "Planner"],
    ["Chaos", "Debris", "Garbage"],
    ["Concert", "Karaoke", "Nightclub"],
    ["Cabin", "Silence", "Hermit"],
    ["Shelter", "Hospital", "Volunteer"],
    ["Lawsuit", "Rivalry", "Grudge"],
    ["Panic", "Nightmare", "Worry"],
    ["Serenity", "Massage", "Spa"],
];

pub const FILLERS: [&str; 30] = [
    "New_York", "Ice_cream", "Video_game", "Rock_music", "Coffee_shop", "Dog", "Park", "Football",
    "Guitar", "Kitchen", "Garden", "Library", "Beach", "Mountain", "Train", "Bicycle", "Pizza",
    "Chess", "Movie", "Piano", "Tennis", "Camera", "Novel", "Ocean", "Forest", "River", "Village",
    "Museum", "Tiger", "Volcano",
];

fn marker_entities() -> Vec<&'static str> {
    MARKERS.iter().flat_map(|(p, n)| p.iter().chain(n)).copied().collect()
}

const TEMPLATES: [&str; 8] = [
    "I often think about {}.",
    "My friends say {} matters to me.",
    "Yesterday we talked about {} for hours.",
    "Honestly, {} is on my mind.",
    "Somehow {} keeps coming up.",
    "Lately there is {} everywhere.",
    "I wrote a letter about {}.",
    "Nobody expected {} today.",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixtureSpec {
    pub documents: usize,
    pub seed: u64,
    pub structural: bool,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        Self { documents: 30, seed: 42, structural: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    /// `doc_id,text` CSV.
    pub corpus: String,
    /// `doc_id,O,C,E,A,N` CSV.
    pub labels: String,
    pub triples: String,
    pub gazetteer: String,
    pub label_rows: Vec<(String, TraitLabels)>,
}

/// How an entity is written in running text.
fn surface(entity: &str, rng: &mut ChaCha8Rng) -> String {
    match entity {
        "New_York" => "New York".to_string(),
        "Dog" if rng.gen_bool(0.5) => "dogs".to_string(),
        "Park" if rng.gen_bool(0.5) => "parks".to_string(),
        _ => entity.replace('_', " ").to_lowercase(),
    }
}

fn balanced_labels(n: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut v: Vec<u8> = (0..n).map(|i| u8::from(i < n / 2)).collect();
    v.shuffle(rng);
    v
}

pub fn generate(spec: &FixtureSpec) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.documents;
    let columns: Vec<Vec<u8>> = (0..5).map(|_| balanced_labels(n, &mut rng)).collect();
    let mut flipped: Vec<usize> = (0..n).collect();
    flipped.shuffle(&mut rng);

    let mut corpus = String::from("doc_id,text\n");
    let mut label_rows = Vec::with_capacity(n);
    for d in 0..n {
        let id = format!("doc{:02}", d + 1);
        let labels = TraitLabels(std::array::from_fn(|t| columns[t][d]));
        let mut mentions: Vec<&str> = Vec::new();
        for (t, (pos, neg)) in MARKERS.iter().enumerate() {
            let mut y = labels.0[t];
            if flipped[t] == d {
                y = 1 - y;
            }
            let slot = 2 * t + usize::from(y == 0);
            for &marker in if y == 1 { pos } else { neg } {
                if spec.structural && rng.gen_bool(0.5) {
                    mentions.push(ASSOCIATES[slot].choose(&mut rng).unwrap());
                } else {
                    mentions.push(marker);
                }
            }
        }
        let k = rng.gen_range(2..=3);
        mentions.extend(FILLERS.choose_multiple(&mut rng, k));
        mentions.shuffle(&mut rng);
        let sentences: Vec<String> = mentions
            .iter()
            .map(|m| {
                let s = surface(m, &mut rng);
                TEMPLATES.choose(&mut rng).unwrap().replace("{}", &s)
            })
            .collect();
        writeln!(corpus, "{id},\"{}\"", sentences.join(" ")).unwrap();
        label_rows.push((id, labels));
    }

    let mut entities = marker_entities();
    entities.extend(FILLERS);
    if spec.structural {
        entities.extend(ASSOCIATES.iter().flatten());
    }
    let gazetteer: String = entities.iter().map(|e| format!("{}\n", e.replace('_', " "))).collect();

    Fixture {
        corpus,
        labels: write_label_csv(&label_rows),
        triples: triples(spec.structural, &mut rng),
        gazetteer,
        label_rows,
    }
}

fn triples(structural: bool, rng: &mut ChaCha8Rng) -> String {
    let iri = |e: &str| format!("<{RESOURCE_PREFIX}{e}>");
    let link = |p: &str| format!("<{ONTOLOGY}{p}>");
    let mut out = String::new();
    let mut entities = marker_entities();
    entities.extend(FILLERS);
    // every entity gets a literal label and at least three outgoing links
    for &e in &entities {
        writeln!(out, "{} <http://www.w3.org/2000/01/rdf-schema#label> \"{}\"@en .", iri(e), e.replace('_', " "))
            .unwrap();
        for target in entities.choose_multiple(rng, 3) {
            writeln!(out, "{} {} {} .", iri(e), link("wikiPageWikiLink"), iri(target)).unwrap();
        }
    }
    // a self-reference, a blank node and a repeated pair under another predicate
    writeln!(out, "{} {} {} .", iri("Dog"), link("wikiPageWikiLink"), iri("Dog")).unwrap();
    writeln!(out, "_:b0 {} {} .", link("related"), iri("Park")).unwrap();
    writeln!(out, "{} {} {} .", iri("Dog"), link("related"), iri("Park")).unwrap();
    writeln!(out, "{} {} {} .", iri("Park"), link("wikiPageWikiLink"), iri("Dog")).unwrap();
    if structural {
        for (slot, group) in ASSOCIATES.iter().enumerate() {
            let (pos, neg) = MARKERS[slot / 2];
            let markers = if slot % 2 == 0 { pos } else { neg };
            for (i, &a) in group.iter().enumerate() {
                for m in markers {
                    writeln!(out, "{} {} {} .", iri(a), link("wikiPageWikiLink"), iri(m)).unwrap();
                }
                writeln!(out, "{} {} {} .", iri(a), link("related"), iri(group[(i + 1) % 3])).unwrap();
            }
        }
    }
    out
}

/// Writes `corpus.csv`, `labels.csv`, `triples.nt` and `gazetteer.txt`.
pub fn write_fixture(fixture: &Fixture, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("corpus.csv"), &fixture.corpus)?;
    fs::write(dir.join("labels.csv"), &fixture.labels)?;
    fs::write(dir.join("triples.nt"), &fixture.triples)?;
    fs::write(dir.join("gazetteer.txt"), &fixture.gazetteer)?;
    Ok(())
}
