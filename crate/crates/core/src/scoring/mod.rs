//! Feature extraction and the local event and relation scorers.
//!
//! A [`JointScorer`] owns an event scorer (2 outputs), a relation scorer
//! (7 outputs, [`RelationLabel`] order) and the token encoder they read. With a
//! shared encoder both scorers read (and train) the same embedding table;
//! otherwise each owns a copy.

mod embedding;
mod features;
mod scorer;

use std::collections::BTreeMap;

use rand::Rng;

pub use embedding::{Embeddings, PrecomputedEmbeddings};
pub use features::{distance_bucket, EmbeddingRef, FeatureConfig, FeatureVector, DISTANCE_BUCKETS};
pub use scorer::{Scorer, ScorerKind};

use crate::error::{Error, Result};
use crate::types::{CandidateSet, Document, Pair, RelationLabel};

/// Local scores for every candidate of one document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScoreTable {
    /// `[score(NON_EVENT), score(EVENT)]` per token.
    pub events: BTreeMap<usize, [f64; 2]>,
    /// Seven scores per pair, indexed by [`RelationLabel::index`].
    pub relations: BTreeMap<Pair, [f64; 7]>,
}

impl ScoreTable {
    pub fn matches(&self, candidates: &CandidateSet) -> bool {
        self.events.keys().eq(candidates.events.iter())
            && self.relations.keys().eq(candidates.pairs.iter())
    }

    pub fn event(&self, k: usize) -> [f64; 2] {
        self.events[&k]
    }

    pub fn relation(&self, pair: Pair) -> [f64; 7] {
        self.relations[&pair]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Encoder {
    Shared(Embeddings),
    Separate {
        event: Embeddings,
        relation: Embeddings,
    },
}

impl Encoder {
    pub fn is_shared(&self) -> bool {
        matches!(self, Encoder::Shared(_))
    }

    pub fn event(&self) -> &Embeddings {
        match self {
            Encoder::Shared(e) => e,
            Encoder::Separate { event, .. } => event,
        }
    }

    pub fn relation(&self) -> &Embeddings {
        match self {
            Encoder::Shared(e) => e,
            Encoder::Separate { relation, .. } => relation,
        }
    }
}

/// Index of each parameter block in [`JointScorer::blocks`].
pub const EVENT_BLOCK: usize = 0;
pub const RELATION_BLOCK: usize = 1;
pub const ENCODER_BLOCK: usize = 2;

/// Per-block gradients, parallel to [`JointScorer::blocks`].
pub type Gradient = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct JointScorer {
    pub features: FeatureConfig,
    pub event: Scorer,
    pub relation: Scorer,
    pub encoder: Encoder,
}

impl JointScorer {
    /// Fresh scorers over `embeddings`. When `shared` is false the relation side
    /// gets its own copy of the table, identical at initialization.
    pub fn new<R: Rng>(
        features: FeatureConfig,
        kind: ScorerKind,
        hidden: usize,
        embeddings: Embeddings,
        shared: bool,
        rng: &mut R,
    ) -> Self {
        let d = embeddings.dim();
        let event = Scorer::random(kind, features.event_dim(d), hidden, 2, rng);
        let relation = Scorer::random(kind, features.relation_dim(d), hidden, 7, rng);
        let encoder = if shared {
            Encoder::Shared(embeddings)
        } else {
            Encoder::Separate {
                event: embeddings.clone(),
                relation: embeddings,
            }
        };
        JointScorer {
            features,
            event,
            relation,
            encoder,
        }
    }

    pub fn event_features(&self, doc: &Document, k: usize) -> FeatureVector {
        self.features.event_features(doc, k, self.encoder.event())
    }

    pub fn relation_features(&self, doc: &Document, i: usize, j: usize) -> FeatureVector {
        self.features
            .relation_features(doc, i, j, self.encoder.relation())
    }

    pub fn score_event(&self, doc: &Document, k: usize) -> Result<[f64; 2]> {
        let s = self.event.score(&self.event_features(doc, k).values)?;
        Ok([s[0], s[1]])
    }

    pub fn score_relation(&self, doc: &Document, i: usize, j: usize) -> Result<[f64; 7]> {
        let s = self
            .relation
            .score(&self.relation_features(doc, i, j).values)?;
        let mut out = [0.0; 7];
        out.copy_from_slice(&s);
        Ok(out)
    }

    /// Trainable parameter blocks: event scorer, relation scorer, then the
    /// encoder table(s). Frozen encoders contribute empty blocks.
    pub fn blocks(&self) -> Vec<&[f64]> {
        let mut out = vec![&self.event.params[..], &self.relation.params[..]];
        match &self.encoder {
            Encoder::Shared(e) => out.push(e.params()),
            Encoder::Separate { event, relation } => {
                out.push(event.params());
                out.push(relation.params());
            }
        }
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = vec![&mut self.event.params[..], &mut self.relation.params[..]];
        match &mut self.encoder {
            Encoder::Shared(e) => out.push(e.params_mut()),
            Encoder::Separate { event, relation } => {
                out.push(event.params_mut());
                out.push(relation.params_mut());
            }
        }
        out
    }

    pub fn zero_gradient(&self) -> Gradient {
        self.blocks().iter().map(|b| vec![0.0; b.len()]).collect()
    }

    fn relation_encoder_block(&self) -> usize {
        if self.encoder.is_shared() {
            ENCODER_BLOCK
        } else {
            ENCODER_BLOCK + 1
        }
    }

    fn scatter(
        emb: &Embeddings,
        doc: &Document,
        refs: &[EmbeddingRef],
        dfeat: &[f64],
        scale: f64,
        out: &mut [f64],
    ) {
        if !emb.is_trainable() {
            return;
        }
        let d = emb.dim();
        for r in refs {
            let row = emb.row(doc, r.token).expect("trainable row");
            let g = &dfeat[r.offset..r.offset + d];
            for (o, x) in out[row * d..(row + 1) * d].iter_mut().zip(g) {
                *o += scale * r.scale * x;
            }
        }
    }

    /// Adds `scale * d(upstream . event_score(k))/dparams` into `grad`.
    pub fn backprop_event(
        &self,
        doc: &Document,
        k: usize,
        upstream: &[f64; 2],
        scale: f64,
        grad: &mut Gradient,
    ) -> Result<()> {
        let f = self.event_features(doc, k);
        let (dp, df) = self.event.gradient(&f.values, upstream)?;
        for (o, x) in grad[EVENT_BLOCK].iter_mut().zip(&dp) {
            *o += scale * x;
        }
        Self::scatter(
            self.encoder.event(),
            doc,
            &f.embedding_refs,
            &df,
            scale,
            &mut grad[ENCODER_BLOCK],
        );
        Ok(())
    }

    /// Adds `scale * d(upstream . relation_score(i, j))/dparams` into `grad`.
    pub fn backprop_relation(
        &self,
        doc: &Document,
        pair: Pair,
        upstream: &[f64; 7],
        scale: f64,
        grad: &mut Gradient,
    ) -> Result<()> {
        let f = self.relation_features(doc, pair.0, pair.1);
        let (dp, df) = self.relation.gradient(&f.values, upstream)?;
        for (o, x) in grad[RELATION_BLOCK].iter_mut().zip(&dp) {
            *o += scale * x;
        }
        let block = self.relation_encoder_block();
        Self::scatter(
            self.encoder.relation(),
            doc,
            &f.embedding_refs,
            &df,
            scale,
            &mut grad[block],
        );
        Ok(())
    }
}

/// Scores every candidate of `doc`.
pub fn build_score_table(
    doc: &Document,
    candidates: &CandidateSet,
    scorer: &JointScorer,
) -> Result<ScoreTable> {
    let mut table = ScoreTable::default();
    for &k in &candidates.events {
        if k >= doc.tokens.len() {
            return Err(Error::contract(format!("candidate {k} out of range")));
        }
        table.events.insert(k, scorer.score_event(doc, k)?);
    }
    for &(i, j) in &candidates.pairs {
        table
            .relations
            .insert((i, j), scorer.score_relation(doc, i, j)?);
    }
    Ok(table)
}

/// Label with the highest score; ties go to the earliest label.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / z).collect()
}

/// Convenience for relation score vectors.
pub fn best_relation(scores: &[f64; 7]) -> RelationLabel {
    RelationLabel::ALL[argmax(scores)]
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::types::tests::doc;
    use crate::types::{generate_candidates, PosFilter};

    fn config() -> FeatureConfig {
        FeatureConfig {
            window: 1,
            pos_vocab: vec!["VB".into()],
            tense_vocab: vec![],
            polarity_vocab: vec![],
        }
    }

    fn scorer(shared: bool) -> (Document, JointScorer) {
        let d = doc(&[("a", "VB", 0), ("b", "NN", 0), ("c", "VB", 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let emb = Embeddings::lookup(std::slice::from_ref(&d), 4, &mut rng);
        let s = JointScorer::new(config(), ScorerKind::Mlp, 5, emb, shared, &mut rng);
        (d, s)
    }

    #[test]
    fn empty_candidates_empty_table() {
        let (d, s) = scorer(true);
        let t = build_score_table(&d, &CandidateSet::default(), &s).unwrap();
        assert!(t.events.is_empty() && t.relations.is_empty());
    }

    #[test]
    fn shared_and_separate_start_identical() {
        let (d, shared) = scorer(true);
        let (_, separate) = scorer(false);
        let c = generate_candidates(&d, &PosFilter::All);
        let a = build_score_table(&d, &c, &shared).unwrap();
        let b = build_score_table(&d, &c, &separate).unwrap();
        assert_eq!(a, b);
        assert!(a.matches(&c));
    }

    #[test]
    fn table_is_deterministic() {
        let (d, s) = scorer(true);
        let c = generate_candidates(&d, &PosFilter::All);
        let a = build_score_table(&d, &c, &s).unwrap();
        let b = build_score_table(&d, &c, &s).unwrap();
        assert_eq!(a, b);
    }

    fn event_step_changes_relation(shared: bool) -> bool {
        let (d, mut s) = scorer(shared);
        let before = s.score_relation(&d, 0, 2).unwrap();
        let mut g = s.zero_gradient();
        s.backprop_event(&d, 0, &[0.0, 1.0], 1.0, &mut g).unwrap();
        for (block, grad) in s.blocks_mut().into_iter().zip(&g) {
            for (p, x) in block.iter_mut().zip(grad) {
                *p += 0.5 * x;
            }
        }
        s.score_relation(&d, 0, 2).unwrap() != before
    }

    #[test]
    fn shared_encoder_aliases_updates() {
        assert!(event_step_changes_relation(true));
        assert!(!event_step_changes_relation(false));
    }

    #[test]
    fn softmax_of_constants_is_uniform() {
        let p = softmax(&[3.0; 7]);
        assert!(p.iter().all(|&x| (x - 1.0 / 7.0).abs() < 1e-15));
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
    }
}
