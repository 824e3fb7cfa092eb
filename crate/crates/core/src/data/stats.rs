use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::types::{generate_candidates, Document, PosFilter, RelationLabel};

/// Counts for one split.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SplitStats {
    pub split: String,
    pub documents: usize,
    pub tokens: usize,
    pub events: usize,
    /// Pairs carrying a positive label.
    pub relation_pairs: usize,
    /// Same-or-adjacent-sentence pairs whose gold label is `NONE`.
    pub none_pairs: usize,
    /// All seven labels, `NONE` included.
    pub per_label: BTreeMap<RelationLabel, usize>,
}

impl SplitStats {
    pub fn total_pairs(&self) -> usize {
        self.relation_pairs + self.none_pairs
    }
}

/// Counts over the same-or-adjacent-sentence pair space plus any annotated pair
/// outside it.
pub fn dataset_stats(split: &str, docs: &[Document]) -> SplitStats {
    let mut s = SplitStats {
        split: split.to_owned(),
        per_label: RelationLabel::ALL.iter().map(|&l| (l, 0)).collect(),
        ..Default::default()
    };
    for doc in docs {
        s.documents += 1;
        s.tokens += doc.tokens.len();
        s.events += doc.gold_events.len();
        let mut keys: BTreeSet<_> = generate_candidates(doc, &PosFilter::All)
            .pairs
            .into_iter()
            .collect();
        keys.extend(doc.gold_relations.keys().copied());
        for (i, j) in keys {
            let label = doc.gold_relation(i, j);
            *s.per_label.get_mut(&label).expect("all labels present") += 1;
            if label.is_positive() {
                s.relation_pairs += 1;
            } else {
                s.none_pairs += 1;
            }
        }
    }
    s
}

impl fmt::Display for SplitStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} documents, {} tokens, {} events, {} relation pairs, {} NONE pairs",
            self.split,
            self.documents,
            self.tokens,
            self.events,
            self.relation_pairs,
            self.none_pairs
        )?;
        for (label, n) in &self.per_label {
            writeln!(f, "  {:<13} {n}", label.as_str())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::tests::doc;

    #[test]
    fn empty_corpus_is_zero() {
        let s = dataset_stats("test", &[]);
        assert_eq!(s.documents, 0);
        assert_eq!(s.total_pairs(), 0);
        assert!(s.per_label.values().all(|&n| n == 0));
    }

    #[test]
    fn totals_add_up() {
        let mut d = doc(&[
            ("a", "VB", 0),
            ("b", "VB", 0),
            ("c", "NN", 1),
            ("d", "VB", 1),
        ]);
        d.gold_events.extend([0, 1, 3]);
        d.gold_relations.insert((0, 1), RelationLabel::Before);
        d.gold_relations.insert((0, 3), RelationLabel::Vague);
        let s = dataset_stats("train", &[d]);
        assert_eq!(s.relation_pairs, 3); // (1, 3) unannotated between events reads VAGUE
        assert_eq!(s.none_pairs, 3);
        let positive: usize = s
            .per_label
            .iter()
            .filter(|(l, _)| l.is_positive())
            .map(|(_, n)| n)
            .sum();
        assert_eq!(
            s.total_pairs(),
            positive + s.per_label[&RelationLabel::None]
        );
    }
}
