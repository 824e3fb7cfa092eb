//! Feasible relation labels for each combination of endpoint event labels
//! under the consistency rows alone.

use std::collections::BTreeMap;

use tempjoint::inference::{build_ilp, Constraints};
use tempjoint::scoring::ScoreTable;
use tempjoint::{CandidateSet, EventLabel, JointAssignment, RelationLabel};

#[test]
fn consistency_rows_reproduce_the_truth_table() {
    let c = CandidateSet {
        events: vec![0, 1],
        pairs: vec![(0, 1)],
    };
    let mut s = ScoreTable::default();
    s.events.insert(0, [0.0; 2]);
    s.events.insert(1, [0.0; 2]);
    s.relations.insert((0, 1), [0.0; 7]);
    let inst = build_ilp(&s, &c, 1.0, None, Constraints::CONSISTENCY_ONLY).unwrap();

    for ei in EventLabel::ALL {
        for ej in EventLabel::ALL {
            let feasible: Vec<RelationLabel> = RelationLabel::ALL
                .into_iter()
                .filter(|&r| {
                    let a = JointAssignment {
                        events: BTreeMap::from([(0, ei), (1, ej)]),
                        relations: BTreeMap::from([((0, 1), r)]),
                    };
                    let choice = inst.encode(&a).unwrap();
                    inst.violated_rows(&inst.values_of(&choice)).is_empty()
                })
                .collect();
            // (r^P, r^N): a positive label only when both are events, NONE otherwise
            let expected: Vec<RelationLabel> = if ei == EventLabel::Event && ej == EventLabel::Event
            {
                RelationLabel::POSITIVE.to_vec()
            } else {
                vec![RelationLabel::None]
            };
            assert_eq!(feasible, expected, "e_i = {ei}, e_j = {ej}");
        }
    }
}
