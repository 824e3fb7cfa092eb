//! Synthetic corpora with planted, transitivity-consistent temporal graphs.
//!
//! Every event gets a latent interval on a small integer grid and pair labels
//! follow from comparing intervals (overlaps that match no definite label are
//! `VAGUE`). A fraction of definite labels is then relabeled `VAGUE` where that
//! keeps the graph valid. Token vectors encode eventness in dimension 0 and the
//! interval endpoints as thermometer codes in the following dimensions, all
//! with Gaussian noise, so both tasks are learnable but imperfect.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::algebra::{CompositionTable, Interval};
use crate::error::{Error, Result};
use crate::scoring::PrecomputedEmbeddings;
use crate::types::{CandidateSet, Document, RelationLabel, Token};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub documents: usize,
    pub sentences: usize,
    pub tokens_per_sentence: usize,
    pub event_rate: f64,
    pub vague_rate: f64,
    /// Standard deviation of the noise added to every embedding coordinate.
    pub noise: f64,
    pub embedding_dim: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            documents: 250,
            sentences: 3,
            tokens_per_sentence: 5,
            event_rate: 0.4,
            vague_rate: 0.15,
            noise: 0.9,
            embedding_dim: 16,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, rate) in [
            ("event_rate", self.event_rate),
            ("vague_rate", self.vague_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Config(format!(
                    "{name} must be in [0, 1], got {rate}"
                )));
            }
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::Config("noise must be a nonnegative number".into()));
        }
        if self.embedding_dim == 0 {
            return Err(Error::Config("embedding_dim must be positive".into()));
        }
        Ok(())
    }
}

/// Documents plus the per-token vectors that go with them.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub documents: Vec<Document>,
    pub embeddings: PrecomputedEmbeddings,
}

/// Intervals live on `0..=GRID`.
const GRID: i32 = 6;

const EVENT_POS: [(&str, f64); 2] = [("VB", 0.75), ("NN", 0.25)];
const OTHER_POS: [(&str, f64); 6] = [
    ("VB", 0.2),
    ("NN", 0.25),
    ("DT", 0.2),
    ("JJ", 0.15),
    ("IN", 0.1),
    ("RB", 0.1),
];
const TENSES: [&str; 3] = ["PAST", "PRESENT", "FUTURE"];

fn pick<'a, R: Rng>(rng: &mut R, table: &[(&'a str, f64)]) -> &'a str {
    let mut x = rng.random::<f64>() * table.iter().map(|t| t.1).sum::<f64>();
    for &(v, w) in table {
        if x < w {
            return v;
        }
        x -= w;
    }
    table[table.len() - 1].0
}

fn random_interval<R: Rng>(rng: &mut R) -> Interval {
    let start = rng.random_range(0..GRID);
    let end = rng.random_range(start + 1..=GRID);
    Interval { start, end }
}

fn encode(
    is_event: bool,
    interval: Interval,
    dim: usize,
    noise: &Normal<f64>,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    let sign = |b: bool| if b { 1.0 } else { -1.0 };
    let mut signal = vec![sign(is_event)];
    signal.extend((0..GRID - 1).map(|t| sign(interval.start > t)));
    signal.extend((1..GRID).map(|t| sign(interval.end > t)));
    for (x, s) in v.iter_mut().zip(signal) {
        *x = s;
    }
    for x in &mut v {
        *x += noise.sample(rng);
    }
    v
}

/// Generates `config.documents` documents; identical configs give identical
/// output.
pub fn generate_synthetic(config: &SynthConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let noise = Normal::new(0.0, config.noise).expect("validated noise");
    let table = CompositionTable::shared();
    let mut embeddings = PrecomputedEmbeddings::new(config.embedding_dim);
    let mut documents = Vec::with_capacity(config.documents);

    for d in 0..config.documents {
        let doc_id = format!("synth-{}-{d:04}", config.seed);
        let mut doc = Document {
            doc_id: doc_id.clone(),
            tokens: Vec::new(),
            gold_events: Default::default(),
            gold_relations: Default::default(),
        };
        let mut intervals = Vec::new();
        for s in 0..config.sentences {
            for _ in 0..config.tokens_per_sentence {
                let index = doc.tokens.len();
                let is_event = rng.random::<f64>() < config.event_rate;
                let interval = random_interval(&mut rng);
                let pos = if is_event {
                    pick(&mut rng, &EVENT_POS)
                } else {
                    pick(&mut rng, &OTHER_POS)
                };
                let word = if is_event {
                    rng.random_range(0..40)
                } else {
                    rng.random_range(20..80)
                };
                let (tense, polarity) = if pos == "VB" {
                    let tense = if is_event && rng.random::<f64>() < 0.7 {
                        TENSES[(interval.start * 3 / GRID) as usize]
                    } else {
                        TENSES[rng.random_range(0..3)]
                    };
                    let polarity = if rng.random::<f64>() < 0.9 {
                        "POS"
                    } else {
                        "NEG"
                    };
                    (tense, polarity)
                } else {
                    ("", "")
                };
                doc.tokens.push(Token {
                    index,
                    text: format!("w{word}"),
                    pos: pos.to_owned(),
                    sentence: s,
                    tense: tense.to_owned(),
                    polarity: polarity.to_owned(),
                });
                if is_event {
                    doc.gold_events.insert(index);
                }
                embeddings.insert(
                    &doc_id,
                    index,
                    encode(is_event, interval, config.embedding_dim, &noise, &mut rng),
                )?;
                intervals.push(interval);
            }
        }

        let events: Vec<usize> = doc.gold_events.iter().copied().collect();
        let space = CandidateSet::from_events(&doc, events);
        for &(i, j) in &space.pairs {
            let label = intervals[i]
                .relation_to(intervals[j])
                .unwrap_or(RelationLabel::Vague);
            doc.gold_relations.insert((i, j), label);
        }
        // relabel as VAGUE only where every triple closing on (i, k) allows it
        let triples = space.triples();
        for &(i, k) in &space.pairs {
            if doc.gold_relations[&(i, k)] == RelationLabel::Vague
                || rng.random::<f64>() >= config.vague_rate
            {
                continue;
            }
            let allowed = triples
                .iter()
                .filter(|t| (t.0, t.2) == (i, k))
                .all(|&(_, j, _)| {
                    let r1 = doc.gold_relations[&(i, j)];
                    let r2 = doc.gold_relations[&(j, k)];
                    table.get(r1, r2).contains(RelationLabel::Vague)
                });
            if allowed {
                doc.gold_relations.insert((i, k), RelationLabel::Vague);
            }
        }
        documents.push(doc);
    }
    Ok(SyntheticCorpus {
        documents,
        embeddings,
    })
}
