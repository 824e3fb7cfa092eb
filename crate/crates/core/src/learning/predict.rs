use super::model::Model;
use super::train::event_probability;
use crate::error::Result;
use crate::inference::{map_inference, Constraints};
use crate::scoring::{argmax, best_relation, build_score_table};
use crate::types::{
    generate_candidates, CandidateSet, Document, EventLabel, JointAssignment, RelationLabel,
};

/// How a trained model turns local scores into labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoding {
    /// Event argmax, then relation argmax over pairs of predicted events.
    Local,
    /// Exact joint inference under the given rows, after fixing tokens below
    /// `t_event` to `NON_EVENT`.
    Joint(Constraints),
}

/// Joint prediction with every constraint enabled.
pub fn predict(model: &Model, doc: &Document) -> Result<JointAssignment> {
    predict_with(model, doc, Decoding::Joint(Constraints::FULL))
}

/// Labels every POS-admitted token and every pair of them.
pub fn predict_with(model: &Model, doc: &Document, decoding: Decoding) -> Result<JointAssignment> {
    let candidates = generate_candidates(doc, &model.pos_filter());
    let scorer = &model.scorer;
    match decoding {
        Decoding::Local => {
            let mut out = JointAssignment::null(&candidates);
            let mut events = Vec::new();
            for &k in &candidates.events {
                if argmax(&scorer.score_event(doc, k)?) == EventLabel::Event.index() {
                    out.events.insert(k, EventLabel::Event);
                    events.push(k);
                }
            }
            for (i, j) in CandidateSet::from_events(doc, events).pairs {
                let label: RelationLabel = best_relation(&scorer.score_relation(doc, i, j)?);
                out.relations.insert((i, j), label);
            }
            Ok(out)
        }
        Decoding::Joint(constraints) => {
            let scores = build_score_table(doc, &candidates, scorer)?;
            let mut non_events = Vec::new();
            for &k in &candidates.events {
                if event_probability(scorer, doc, k)? < model.config.t_event {
                    non_events.push(k);
                }
            }
            let solution = map_inference(
                &scores,
                &candidates,
                model.config.c_event,
                constraints,
                &non_events,
            )?;
            Ok(solution.assignment)
        }
    }
}
