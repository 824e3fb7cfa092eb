//! Line-delimited JSON corpus and prediction files.
//!
//! One document per line:
//!
//! ```json
//! {"doc_id":"d1","tokens":[{"text":"left","pos":"VB","sentence":0,"tense":"PAST","polarity":"POS"}],
//!  "events":[0],"relations":[{"src":0,"tgt":3,"label":"BEFORE"}]}
//! ```
//!
//! Token indices are positions in `tokens`. Relations use `src < tgt`. Unknown
//! fields are ignored with a warning. The canonical form written by
//! [`write_corpus`] is compact JSON with sorted events and relations, so
//! reading and re-writing a canonical file reproduces it byte for byte.
//!
//! TB-Dense and MATRES map onto this format by taking `eid`-bearing tokens as
//! `events`, TLINK event-event links as `relations` (with `src`/`tgt` swapped
//! and the label inverted when the source follows the target), and the
//! `tense`/`polarity` attributes of `MAKEINSTANCE` elements where present.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::types::{Document, EventLabel, JointAssignment, RelationLabel, Token};

#[derive(Debug, Serialize, Deserialize)]
struct TokenRecord {
    text: String,
    pos: String,
    sentence: usize,
    #[serde(default)]
    tense: String,
    #[serde(default)]
    polarity: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RelationRecord {
    src: usize,
    tgt: usize,
    label: RelationLabel,
}

#[derive(Debug, Serialize, Deserialize)]
struct DocumentRecord {
    doc_id: String,
    tokens: Vec<TokenRecord>,
    #[serde(default)]
    events: Vec<usize>,
    #[serde(default)]
    relations: Vec<RelationRecord>,
}

const DOC_FIELDS: [&str; 4] = ["doc_id", "tokens", "events", "relations"];
const TOKEN_FIELDS: [&str; 5] = ["text", "pos", "sentence", "tense", "polarity"];
const RELATION_FIELDS: [&str; 3] = ["src", "tgt", "label"];

fn warn_unknown(value: &Value, known: &[&str], what: &str, line: usize) {
    if let Value::Object(map) = value {
        for key in map.keys().filter(|k| !known.contains(&k.as_str())) {
            log::warn!("line {line}: ignoring unknown {what} field {key:?}");
        }
    }
}

fn parse_document(line: &str, n: usize) -> Result<Document> {
    let value: Value = serde_json::from_str(line).map_err(|e| Error::parse(n, e.to_string()))?;
    warn_unknown(&value, &DOC_FIELDS, "document", n);
    for (field, known, what) in [
        ("tokens", &TOKEN_FIELDS[..], "token"),
        ("relations", &RELATION_FIELDS[..], "relation"),
    ] {
        if let Some(Value::Array(items)) = value.get(field) {
            for item in items {
                warn_unknown(item, known, what, n);
            }
        }
    }
    let record: DocumentRecord =
        serde_json::from_value(value).map_err(|e| Error::parse(n, e.to_string()))?;

    let mut gold_relations = BTreeMap::new();
    for r in &record.relations {
        if gold_relations.insert((r.src, r.tgt), r.label).is_some() {
            return Err(Error::parse(
                n,
                format!("duplicate relation ({}, {})", r.src, r.tgt),
            ));
        }
    }
    let doc = Document {
        doc_id: record.doc_id,
        tokens: record
            .tokens
            .into_iter()
            .enumerate()
            .map(|(index, t)| Token {
                index,
                text: t.text,
                pos: t.pos,
                sentence: t.sentence,
                tense: t.tense,
                polarity: t.polarity,
            })
            .collect(),
        gold_events: record.events.into_iter().collect(),
        gold_relations,
    };
    doc.validate().map_err(|e| Error::parse(n, e.to_string()))?;
    Ok(doc)
}

/// Documents in file order; any malformed or inconsistent record is an error
/// naming its line.
pub fn read_corpus(reader: impl BufRead) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        docs.push(parse_document(&line, i + 1)?);
    }
    Ok(docs)
}

pub fn load_corpus(path: impl AsRef<std::path::Path>) -> Result<Vec<Document>> {
    let file = std::fs::File::open(path)?;
    read_corpus(std::io::BufReader::new(file))
}

fn to_record(doc: &Document) -> DocumentRecord {
    DocumentRecord {
        doc_id: doc.doc_id.clone(),
        tokens: doc
            .tokens
            .iter()
            .map(|t| TokenRecord {
                text: t.text.clone(),
                pos: t.pos.clone(),
                sentence: t.sentence,
                tense: t.tense.clone(),
                polarity: t.polarity.clone(),
            })
            .collect(),
        events: doc.gold_events.iter().copied().collect(),
        relations: doc
            .gold_relations
            .iter()
            .map(|(&(src, tgt), &label)| RelationRecord { src, tgt, label })
            .collect(),
    }
}

pub fn write_corpus(mut w: impl Write, docs: &[Document]) -> Result<()> {
    for doc in docs {
        serde_json::to_writer(&mut w, &to_record(doc)).map_err(std::io::Error::from)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn save_corpus(path: impl AsRef<std::path::Path>, docs: &[Document]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_corpus(&mut w, docs)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct EventRecord {
    token: usize,
    label: EventLabel,
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionRecord {
    doc_id: String,
    events: Vec<EventRecord>,
    relations: Vec<RelationRecord>,
}

/// Predictions: one line per document with every candidate's label,
/// `{"doc_id":..,"events":[{"token":k,"label":"EVENT"}],"relations":[{"src":i,"tgt":j,"label":"BEFORE"}]}`.
pub fn write_predictions(
    mut w: impl Write,
    predictions: &[(String, JointAssignment)],
) -> Result<()> {
    for (doc_id, a) in predictions {
        let record = PredictionRecord {
            doc_id: doc_id.clone(),
            events: a
                .events
                .iter()
                .map(|(&token, &label)| EventRecord { token, label })
                .collect(),
            relations: a
                .relations
                .iter()
                .map(|(&(src, tgt), &label)| RelationRecord { src, tgt, label })
                .collect(),
        };
        serde_json::to_writer(&mut w, &record).map_err(std::io::Error::from)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_predictions(reader: impl BufRead) -> Result<Vec<(String, JointAssignment)>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: PredictionRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        if !seen.insert(r.doc_id.clone()) {
            return Err(Error::parse(
                i + 1,
                format!("duplicate document {:?}", r.doc_id),
            ));
        }
        let a = JointAssignment {
            events: r.events.iter().map(|e| (e.token, e.label)).collect(),
            relations: r
                .relations
                .iter()
                .map(|x| ((x.src, x.tgt), x.label))
                .collect(),
        };
        out.push((r.doc_id, a));
    }
    Ok(out)
}
