use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::embedding::Embeddings;
use crate::types::Document;

/// Feature layout shared by training and prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Context half-width; `0` drops the context block.
    pub window: usize,
    pub pos_vocab: Vec<String>,
    pub tense_vocab: Vec<String>,
    pub polarity_vocab: Vec<String>,
}

/// Upper bounds of the token-distance buckets; the last bucket is open.
pub const DISTANCE_BUCKETS: [usize; 5] = [1, 2, 3, 4, 9];

pub fn distance_bucket(d: usize) -> usize {
    DISTANCE_BUCKETS
        .iter()
        .position(|&hi| d <= hi)
        .unwrap_or(DISTANCE_BUCKETS.len())
}

/// Where an embedding vector was copied into a feature vector, so gradients can
/// flow back to trainable lookups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingRef {
    pub offset: usize,
    pub token: usize,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub embedding_refs: Vec<EmbeddingRef>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn vocab_index(vocab: &[String], value: &str) -> usize {
    vocab.iter().position(|v| v == value).unwrap_or(vocab.len())
}

impl FeatureConfig {
    /// Vocabularies of every non-empty POS tag, tense and polarity in `docs`,
    /// sorted. Unseen and empty values share the trailing "other" slot.
    pub fn from_documents(docs: &[Document], window: usize) -> Self {
        let mut pos = BTreeSet::new();
        let mut tense = BTreeSet::new();
        let mut polarity = BTreeSet::new();
        for t in docs.iter().flat_map(|d| &d.tokens) {
            pos.insert(t.pos.clone());
            tense.insert(t.tense.clone());
            polarity.insert(t.polarity.clone());
        }
        let clean = |s: BTreeSet<String>| s.into_iter().filter(|v| !v.is_empty()).collect();
        FeatureConfig {
            window,
            pos_vocab: clean(pos),
            tense_vocab: clean(tense),
            polarity_vocab: clean(polarity),
        }
    }

    pub fn event_dim(&self, emb_dim: usize) -> usize {
        let context = if self.window > 0 { emb_dim } else { 0 };
        emb_dim + context + self.pos_vocab.len() + 1
    }

    pub fn relation_dim(&self, emb_dim: usize) -> usize {
        let tenses = self.tense_vocab.len() + 1;
        let polarities = self.polarity_vocab.len() + 1;
        2 * self.event_dim(emb_dim)
            + 1
            + DISTANCE_BUCKETS.len()
            + 1
            + tenses * tenses
            + polarities * polarities
    }

    fn write_event(
        &self,
        doc: &Document,
        k: usize,
        emb: &Embeddings,
        base: usize,
        out: &mut FeatureVector,
    ) {
        let d = emb.dim();
        let mut offset = base;
        emb.accumulate(doc, k, 1.0, &mut out.values[offset..offset + d]);
        out.embedding_refs.push(EmbeddingRef {
            offset,
            token: k,
            scale: 1.0,
        });
        offset += d;

        if self.window > 0 {
            // mean over the 2w neighbours, zeros past the document edges
            let scale = 1.0 / (2 * self.window) as f64;
            let lo = k.saturating_sub(self.window);
            let hi = (k + self.window).min(doc.tokens.len() - 1);
            for n in (lo..=hi).filter(|&n| n != k) {
                emb.accumulate(doc, n, scale, &mut out.values[offset..offset + d]);
                out.embedding_refs.push(EmbeddingRef {
                    offset,
                    token: n,
                    scale,
                });
            }
            offset += d;
        }

        let pos = vocab_index(&self.pos_vocab, &doc.tokens[k].pos);
        out.values[offset + pos] = 1.0;
    }

    /// Token embedding, context-window mean and POS one-hot.
    pub fn event_features(&self, doc: &Document, k: usize, emb: &Embeddings) -> FeatureVector {
        let mut out = FeatureVector {
            values: vec![0.0; self.event_dim(emb.dim())],
            embedding_refs: Vec::new(),
        };
        self.write_event(doc, k, emb, 0, &mut out);
        out
    }

    /// Both endpoints' event features, then distance, distance bucket, tense
    /// pair and polarity pair.
    pub fn relation_features(
        &self,
        doc: &Document,
        i: usize,
        j: usize,
        emb: &Embeddings,
    ) -> FeatureVector {
        debug_assert!(i < j);
        let ed = self.event_dim(emb.dim());
        let mut out = FeatureVector {
            values: vec![0.0; self.relation_dim(emb.dim())],
            embedding_refs: Vec::new(),
        };
        self.write_event(doc, i, emb, 0, &mut out);
        self.write_event(doc, j, emb, ed, &mut out);

        let mut offset = 2 * ed;
        let dist = j - i;
        out.values[offset] = dist as f64;
        offset += 1;
        out.values[offset + distance_bucket(dist)] = 1.0;
        offset += DISTANCE_BUCKETS.len() + 1;

        let (ti, tj) = (&doc.tokens[i], &doc.tokens[j]);
        let tenses = self.tense_vocab.len() + 1;
        let a = vocab_index(&self.tense_vocab, &ti.tense);
        let b = vocab_index(&self.tense_vocab, &tj.tense);
        out.values[offset + a * tenses + b] = 1.0;
        offset += tenses * tenses;

        let polarities = self.polarity_vocab.len() + 1;
        let a = vocab_index(&self.polarity_vocab, &ti.polarity);
        let b = vocab_index(&self.polarity_vocab, &tj.polarity);
        out.values[offset + a * polarities + b] = 1.0;
        out
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::scoring::embedding::PrecomputedEmbeddings;
    use crate::types::tests::doc;

    fn toy() -> (Document, Embeddings) {
        let mut d = doc(&[
            ("a", "VB", 0),
            ("b", "NN", 0),
            ("c", "DT", 0),
            ("d", "VB", 1),
            ("e", "NN", 1),
        ]);
        for (t, (tense, pol)) in d.tokens.iter_mut().zip([
            ("PAST", "POS"),
            ("", ""),
            ("", ""),
            ("PAST", "NEG"),
            ("PRESENT", "POS"),
        ]) {
            t.tense = tense.into();
            t.polarity = pol.into();
        }
        let mut table = PrecomputedEmbeddings::new(2);
        for k in 0..5 {
            table
                .insert("d", k, vec![k as f64, 10.0 * k as f64])
                .unwrap();
        }
        (d, Embeddings::Precomputed(Arc::new(table)))
    }

    fn config(window: usize) -> FeatureConfig {
        FeatureConfig {
            window,
            pos_vocab: vec!["NN".into(), "VB".into()],
            tense_vocab: vec!["PAST".into(), "PRESENT".into()],
            polarity_vocab: vec!["NEG".into(), "POS".into()],
        }
    }

    #[test]
    fn zero_window_is_embedding_plus_pos() {
        let (d, emb) = toy();
        let f = config(0).event_features(&d, 3, &emb);
        assert_eq!(f.values, vec![3.0, 30.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn left_edge_is_zero_padded() {
        let (d, emb) = toy();
        let f = config(2).event_features(&d, 0, &emb);
        // neighbours 1 and 2 only; divided by 2w = 4
        assert_eq!(f.values, vec![0.0, 0.0, 0.75, 7.5, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn window_one_golden() {
        let (d, emb) = toy();
        let f = config(1).event_features(&d, 3, &emb);
        // (e2 + e4) / 2 = (3, 30); POS VB
        assert_eq!(f.values, vec![3.0, 30.0, 3.0, 30.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn relation_golden() {
        let (d, emb) = toy();
        let cfg = config(0);
        let f = cfg.relation_features(&d, 3, 4, &emb);
        assert_eq!(f.len(), cfg.relation_dim(2));
        let mut expected = vec![3.0, 30.0, 0.0, 1.0, 0.0, 4.0, 40.0, 1.0, 0.0, 0.0];
        expected.push(1.0); // distance
        expected.extend([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let mut tense = vec![0.0; 9];
        tense[1] = 1.0; // PAST, PRESENT
        expected.extend(tense);
        let mut pol = vec![0.0; 9];
        pol[1] = 1.0; // NEG, POS
        expected.extend(pol);
        assert_eq!(f.values, expected);
    }

    #[test]
    fn matching_attributes_hit_diagonal() {
        let (mut d, emb) = toy();
        d.tokens[4].tense = "PAST".into();
        d.tokens[4].polarity = "NEG".into();
        let cfg = config(0);
        let f = cfg.relation_features(&d, 3, 4, &emb);
        let base = 2 * cfg.event_dim(2) + 1 + 6;
        assert_eq!(f.values[base], 1.0);
        assert_eq!(f.values[base + 9], 1.0);
    }

    #[test]
    fn buckets() {
        let got: Vec<usize> = [1, 2, 3, 4, 5, 9, 10, 40].map(distance_bucket).to_vec();
        assert_eq!(got, vec![0, 1, 2, 3, 4, 4, 5, 5]);
    }
}
