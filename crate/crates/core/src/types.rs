//! Domain types shared by every stage: labels, documents, candidate sets and
//! joint assignments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Temporal relation between an ordered pair of tokens.
///
/// `None` is the single negative label; the other six are positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RelationLabel {
    Before,
    After,
    Includes,
    IsIncluded,
    Simultaneous,
    Vague,
    None,
}

impl RelationLabel {
    pub const COUNT: usize = 7;

    /// All labels in enumeration order. Score vectors are indexed by this order.
    pub const ALL: [RelationLabel; 7] = [
        RelationLabel::Before,
        RelationLabel::After,
        RelationLabel::Includes,
        RelationLabel::IsIncluded,
        RelationLabel::Simultaneous,
        RelationLabel::Vague,
        RelationLabel::None,
    ];

    pub const POSITIVE: [RelationLabel; 6] = [
        RelationLabel::Before,
        RelationLabel::After,
        RelationLabel::Includes,
        RelationLabel::IsIncluded,
        RelationLabel::Simultaneous,
        RelationLabel::Vague,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn is_positive(self) -> bool {
        self != RelationLabel::None
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RelationLabel::Before => "BEFORE",
            RelationLabel::After => "AFTER",
            RelationLabel::Includes => "INCLUDES",
            RelationLabel::IsIncluded => "IS_INCLUDED",
            RelationLabel::Simultaneous => "SIMULTANEOUS",
            RelationLabel::Vague => "VAGUE",
            RelationLabel::None => "NONE",
        }
    }
}

impl fmt::Display for RelationLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RelationLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::contract(format!("unknown relation label {s:?}")))
    }
}

/// Whether a token is an event trigger. Enumeration order is `NonEvent`, `Event`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventLabel {
    NonEvent,
    Event,
}

impl EventLabel {
    pub const COUNT: usize = 2;
    pub const ALL: [EventLabel; 2] = [EventLabel::NonEvent, EventLabel::Event];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventLabel::NonEvent => "NON_EVENT",
            EventLabel::Event => "EVENT",
        }
    }
}

impl fmt::Display for EventLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EventLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EventLabel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::contract(format!("unknown event label {s:?}")))
    }
}

/// An ordered token pair `(i, j)` with `i < j`.
pub type Pair = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub text: String,
    pub pos: String,
    pub sentence: usize,
    pub tense: String,
    pub polarity: String,
}

/// A tokenized document with gold event and relation annotations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub tokens: Vec<Token>,
    pub gold_events: BTreeSet<usize>,
    pub gold_relations: BTreeMap<Pair, RelationLabel>,
}

impl Document {
    /// Checks token indexing, sentence order, relation keys and gold consistency.
    pub fn validate(&self) -> Result<()> {
        let mut prev_sentence = 0;
        for (pos, tok) in self.tokens.iter().enumerate() {
            if tok.index != pos {
                return Err(Error::contract(format!(
                    "token at position {pos} has index {}",
                    tok.index
                )));
            }
            if tok.sentence < prev_sentence {
                return Err(Error::contract(format!(
                    "sentence index decreases at token {pos}"
                )));
            }
            prev_sentence = tok.sentence;
        }
        let n = self.tokens.len();
        if let Some(&k) = self.gold_events.iter().find(|&&k| k >= n) {
            return Err(Error::contract(format!("gold event {k} out of range")));
        }
        for (&(i, j), &label) in &self.gold_relations {
            if i >= j {
                return Err(Error::contract(format!(
                    "relation key ({i}, {j}) is not ordered"
                )));
            }
            if j >= n {
                return Err(Error::contract(format!("relation ({i}, {j}) out of range")));
            }
            if label.is_positive()
                && !(self.gold_events.contains(&i) && self.gold_events.contains(&j))
            {
                return Err(Error::contract(format!(
                    "positive relation {label} on ({i}, {j}) has a non-event endpoint"
                )));
            }
        }
        Ok(())
    }

    /// Gold labels for every key of `candidates`.
    ///
    /// Pairs with a non-event endpoint are `NONE`. An unannotated pair of two
    /// gold events is read as `VAGUE`.
    pub fn gold_assignment(&self, candidates: &CandidateSet) -> JointAssignment {
        let events = candidates
            .events
            .iter()
            .map(|&k| {
                let label = if self.gold_events.contains(&k) {
                    EventLabel::Event
                } else {
                    EventLabel::NonEvent
                };
                (k, label)
            })
            .collect();
        let relations = candidates
            .pairs
            .iter()
            .map(|&(i, j)| ((i, j), self.gold_relation(i, j)))
            .collect();
        JointAssignment { events, relations }
    }

    pub fn gold_relation(&self, i: usize, j: usize) -> RelationLabel {
        if let Some(&l) = self.gold_relations.get(&(i, j)) {
            return l;
        }
        if self.gold_events.contains(&i) && self.gold_events.contains(&j) {
            RelationLabel::Vague
        } else {
            RelationLabel::None
        }
    }
}

/// Which POS tags may be event candidates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PosFilter {
    #[default]
    All,
    Only(BTreeSet<String>),
}

impl PosFilter {
    pub fn only<I, S>(tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PosFilter::Only(tags.into_iter().map(Into::into).collect())
    }

    pub fn admits(&self, pos: &str) -> bool {
        match self {
            PosFilter::All => true,
            PosFilter::Only(tags) => tags.contains(pos),
        }
    }
}

/// Event candidates and relation candidates of one document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CandidateSet {
    /// Token indices, ascending.
    pub events: Vec<usize>,
    /// Pairs `(i, j)`, `i < j`, in lexicographic order.
    pub pairs: Vec<Pair>,
}

impl CandidateSet {
    /// Builds pair candidates for `events`: every `i < j` within the same or
    /// neighboring sentences.
    pub fn from_events(doc: &Document, mut events: Vec<usize>) -> Self {
        events.sort_unstable();
        events.dedup();
        let mut pairs = Vec::new();
        for (a, &i) in events.iter().enumerate() {
            for &j in &events[a + 1..] {
                if doc.tokens[j].sentence - doc.tokens[i].sentence <= 1 {
                    pairs.push((i, j));
                }
            }
        }
        CandidateSet { events, pairs }
    }

    /// Number of labelled keys, `|events| + |pairs|`.
    pub fn size(&self) -> usize {
        self.events.len() + self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Triples `(i, j, k)`, `i < j < k`, whose three pairs are all candidates.
    pub fn triples(&self) -> Vec<(usize, usize, usize)> {
        let set: BTreeSet<Pair> = self.pairs.iter().copied().collect();
        let mut out = Vec::new();
        for &(i, j) in &self.pairs {
            for &(j2, k) in set.range((j, 0)..(j + 1, 0)) {
                debug_assert_eq!(j2, j);
                if set.contains(&(i, k)) {
                    out.push((i, j, k));
                }
            }
        }
        out
    }
}

/// Event candidates are tokens admitted by `filter`; relation candidates are all
/// ordered pairs of those within the same or adjacent sentences.
pub fn generate_candidates(doc: &Document, filter: &PosFilter) -> CandidateSet {
    let events = doc
        .tokens
        .iter()
        .filter(|t| filter.admits(&t.pos))
        .map(|t| t.index)
        .collect();
    CandidateSet::from_events(doc, events)
}

/// One global labeling of every event and relation candidate.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JointAssignment {
    pub events: BTreeMap<usize, EventLabel>,
    pub relations: BTreeMap<Pair, RelationLabel>,
}

impl JointAssignment {
    /// Everything `NON_EVENT` and `NONE`; feasible under every constraint.
    pub fn null(candidates: &CandidateSet) -> Self {
        JointAssignment {
            events: candidates
                .events
                .iter()
                .map(|&k| (k, EventLabel::NonEvent))
                .collect(),
            relations: candidates
                .pairs
                .iter()
                .map(|&p| (p, RelationLabel::None))
                .collect(),
        }
    }

    pub fn same_keys(&self, other: &JointAssignment) -> bool {
        self.events.keys().eq(other.events.keys())
            && self.relations.keys().eq(other.relations.keys())
    }

    pub fn matches(&self, candidates: &CandidateSet) -> bool {
        self.events.keys().eq(candidates.events.iter())
            && self.relations.keys().eq(candidates.pairs.iter())
    }

    pub fn len(&self) -> usize {
        self.events.len() + self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Number of keys, events and pairs pooled, whose labels differ.
pub fn hamming_distance(a: &JointAssignment, b: &JointAssignment) -> Result<usize> {
    if !a.same_keys(b) {
        return Err(Error::contract("assignments have different key sets"));
    }
    let events = a
        .events
        .values()
        .zip(b.events.values())
        .filter(|(x, y)| x != y)
        .count();
    let relations = a
        .relations
        .values()
        .zip(b.relations.values())
        .filter(|(x, y)| x != y)
        .count();
    Ok(events + relations)
}
