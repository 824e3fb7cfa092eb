use std::collections::BTreeSet;

use super::ilp::Constraints;
use crate::algebra::CompositionTable;
use crate::types::{EventLabel, JointAssignment, Pair, RelationLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    OneLabel,
    Consistency,
    Transitivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Key {
    Event(usize),
    Pair(Pair),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub keys: Vec<Key>,
    pub detail: String,
}

/// Every global-constraint violation in `assignment`.
///
/// Consistency: a positive pair needs both endpoints `EVENT`, and two `EVENT`
/// endpoints need a positive pair. Transitivity: for each triple `i < j < k`
/// with all three pairs positive, `label(i, k)` must be in
/// `compose(label(i, j), label(j, k))`. A pair whose endpoint has no event label
/// is a one-label violation.
pub fn check_validity(assignment: &JointAssignment, table: &CompositionTable) -> Vec<Violation> {
    violations(assignment, table, Constraints::FULL)
}

pub(crate) fn violations(
    assignment: &JointAssignment,
    table: &CompositionTable,
    constraints: Constraints,
) -> Vec<Violation> {
    let mut out = Vec::new();
    for (&(i, j), &r) in &assignment.relations {
        let (ei, ej) = (assignment.events.get(&i), assignment.events.get(&j));
        let (Some(&ei), Some(&ej)) = (ei, ej) else {
            out.push(Violation {
                kind: ViolationKind::OneLabel,
                keys: vec![Key::Pair((i, j))],
                detail: format!("pair ({i}, {j}) has an endpoint without an event label"),
            });
            continue;
        };
        if i >= j {
            out.push(Violation {
                kind: ViolationKind::OneLabel,
                keys: vec![Key::Pair((i, j))],
                detail: format!("pair ({i}, {j}) is not stored in order"),
            });
        }
        if !constraints.consistency {
            continue;
        }
        let both = ei == EventLabel::Event && ej == EventLabel::Event;
        if r.is_positive() != both {
            out.push(Violation {
                kind: ViolationKind::Consistency,
                keys: vec![Key::Event(i), Key::Event(j), Key::Pair((i, j))],
                detail: format!("({i}, {j}) = {r} with endpoints {ei}, {ej}"),
            });
        }
    }
    if constraints.transitivity {
        let pairs: BTreeSet<Pair> = assignment.relations.keys().copied().collect();
        for &(i, j) in &pairs {
            let r1 = assignment.relations[&(i, j)];
            if !r1.is_positive() {
                continue;
            }
            for &(_, k) in pairs.range((j, 0)..(j + 1, 0)) {
                let (Some(&r2), Some(&r3)) = (
                    assignment.relations.get(&(j, k)),
                    assignment.relations.get(&(i, k)),
                ) else {
                    continue;
                };
                if r2 == RelationLabel::None || r3 == RelationLabel::None {
                    continue;
                }
                if !table.get(r1, r2).contains(r3) {
                    out.push(Violation {
                        kind: ViolationKind::Transitivity,
                        keys: vec![Key::Pair((i, j)), Key::Pair((j, k)), Key::Pair((i, k))],
                        detail: format!("({i}, {k}) = {r3} not in {r1} o {r2}"),
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use RelationLabel::*;

    fn assignment(
        events: &[(usize, EventLabel)],
        pairs: &[(Pair, RelationLabel)],
    ) -> JointAssignment {
        JointAssignment {
            events: events.iter().copied().collect(),
            relations: pairs.iter().copied().collect(),
        }
    }

    #[test]
    fn events_with_none_pair() {
        use EventLabel::Event;
        let a = assignment(&[(0, Event), (1, Event)], &[((0, 1), None)]);
        let v = check_validity(&a, CompositionTable::shared());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::Consistency);
    }

    #[test]
    fn non_event_with_positive_pair() {
        let a = assignment(
            &[(0, EventLabel::NonEvent), (1, EventLabel::Event)],
            &[((0, 1), Before)],
        );
        let v = check_validity(&a, CompositionTable::shared());
        assert_eq!(v[0].kind, ViolationKind::Consistency);
    }

    #[test]
    fn broken_triangle() {
        use EventLabel::Event;
        let a = assignment(
            &[(0, Event), (1, Event), (2, Event)],
            &[((0, 1), Before), ((1, 2), Before), ((0, 2), After)],
        );
        let v = check_validity(&a, CompositionTable::shared());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::Transitivity);

        let ok = assignment(
            &[(0, Event), (1, Event), (2, Event)],
            &[((0, 1), Before), ((1, 2), Before), ((0, 2), Before)],
        );
        assert!(check_validity(&ok, CompositionTable::shared()).is_empty());
    }

    #[test]
    fn dangling_pair() {
        let a = assignment(&[(0, EventLabel::NonEvent)], &[((0, 1), None)]);
        let v = check_validity(&a, CompositionTable::shared());
        assert_eq!(v[0].kind, ViolationKind::OneLabel);
    }
}
