use std::ops::Range;

use crate::algebra::CompositionTable;
use crate::error::{Error, Result};
use crate::scoring::ScoreTable;
use crate::types::{CandidateSet, EventLabel, JointAssignment, Pair, RelationLabel};

/// Which families of global constraints to impose. One-label rows are always
/// present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constraints {
    pub consistency: bool,
    pub transitivity: bool,
}

impl Constraints {
    pub const FULL: Constraints = Constraints {
        consistency: true,
        transitivity: true,
    };
    pub const NONE: Constraints = Constraints {
        consistency: false,
        transitivity: false,
    };
    pub const CONSISTENCY_ONLY: Constraints = Constraints {
        consistency: true,
        transitivity: false,
    };
}

impl Default for Constraints {
    fn default() -> Self {
        Constraints::FULL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    OneLabel,
    Consistency,
    Transitivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `sum <= rhs`
    Le,
    /// `sum == rhs`
    Eq,
}

/// A linear row over binary variables with unit coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    pub kind: RowKind,
    /// `(variable, +1 | -1)`
    pub terms: Vec<(usize, i32)>,
    pub sense: Sense,
    pub rhs: i32,
}

impl Row {
    pub fn is_satisfied(&self, values: &[bool]) -> bool {
        let lhs: i32 = self
            .terms
            .iter()
            .map(|&(v, a)| if values[v] { a } else { 0 })
            .sum();
        match self.sense {
            Sense::Le => lhs <= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }
}

/// The joint MAP problem as a 0-1 program.
///
/// Variables come in groups, one per candidate key: the two event labels of each
/// event candidate (in candidate order), then the seven relation labels of each
/// pair. Every group has exactly one variable set in a feasible solution.
#[derive(Debug, Clone, PartialEq)]
pub struct IlpInstance {
    pub candidates: CandidateSet,
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    /// Variables fixed before search, `(variable, value)`.
    pub fixed: Vec<(usize, bool)>,
}

impl IlpInstance {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_groups(&self) -> usize {
        self.candidates.size()
    }

    pub fn event_var(&self, slot: usize, label: EventLabel) -> usize {
        2 * slot + label.index()
    }

    pub fn pair_var(&self, slot: usize, label: RelationLabel) -> usize {
        2 * self.candidates.events.len() + 7 * slot + label.index()
    }

    /// Variable range of group `g`.
    pub fn group(&self, g: usize) -> Range<usize> {
        let ne = self.candidates.events.len();
        if g < ne {
            2 * g..2 * g + 2
        } else {
            let p = g - ne;
            let start = 2 * ne + 7 * p;
            start..start + 7
        }
    }

    pub fn count_rows(&self, kind: RowKind) -> usize {
        self.rows.iter().filter(|r| r.kind == kind).count()
    }

    /// Fixes event candidate `token` to `NON_EVENT`.
    pub fn fix_non_event(&mut self, token: usize) -> Result<()> {
        let slot = self
            .candidates
            .events
            .binary_search(&token)
            .map_err(|_| Error::contract(format!("token {token} is not a candidate")))?;
        self.fixed
            .push((self.event_var(slot, EventLabel::Event), false));
        self.fixed
            .push((self.event_var(slot, EventLabel::NonEvent), true));
        Ok(())
    }

    /// Objective of a choice of one label index per group, summed in group order.
    pub fn objective_of(&self, choice: &[usize]) -> f64 {
        let mut total = 0.0;
        for (g, &label) in choice.iter().enumerate() {
            total += self.objective[self.group(g).start + label];
        }
        total
    }

    pub fn values_of(&self, choice: &[usize]) -> Vec<bool> {
        let mut values = vec![false; self.num_vars()];
        for (g, &label) in choice.iter().enumerate() {
            values[self.group(g).start + label] = true;
        }
        values
    }

    /// Rows violated by a full 0-1 vector, including fixings.
    pub fn violated_rows(&self, values: &[bool]) -> Vec<&Row> {
        self.rows
            .iter()
            .filter(|r| !r.is_satisfied(values))
            .collect()
    }

    pub fn decode(&self, choice: &[usize]) -> JointAssignment {
        let ne = self.candidates.events.len();
        JointAssignment {
            events: self
                .candidates
                .events
                .iter()
                .zip(choice)
                .map(|(&k, &l)| (k, EventLabel::ALL[l]))
                .collect(),
            relations: self
                .candidates
                .pairs
                .iter()
                .zip(&choice[ne..])
                .map(|(&p, &l)| (p, RelationLabel::ALL[l]))
                .collect(),
        }
    }

    /// Inverse of [`decode`](Self::decode).
    pub fn encode(&self, assignment: &JointAssignment) -> Result<Vec<usize>> {
        if !assignment.matches(&self.candidates) {
            return Err(Error::contract(
                "assignment keys differ from the candidates",
            ));
        }
        Ok(assignment
            .events
            .values()
            .map(|l| l.index())
            .chain(assignment.relations.values().map(|l| l.index()))
            .collect())
    }
}

fn pair_slots(candidates: &CandidateSet) -> std::collections::HashMap<Pair, usize> {
    candidates
        .pairs
        .iter()
        .enumerate()
        .map(|(s, &p)| (p, s))
        .collect()
}

/// Builds the objective and constraint rows for one document.
///
/// Relation variables take the raw relation score; event variables take
/// `c_event` times the event score. With `loss_augment`, every variable whose
/// label differs from the gold label gets `+1`.
pub fn build_ilp(
    scores: &ScoreTable,
    candidates: &CandidateSet,
    c_event: f64,
    loss_augment: Option<&JointAssignment>,
    constraints: Constraints,
) -> Result<IlpInstance> {
    if !scores.matches(candidates) {
        return Err(Error::contract(
            "score table keys differ from the candidates",
        ));
    }
    if let Some(gold) = loss_augment {
        if !gold.matches(candidates) {
            return Err(Error::contract(
                "gold assignment keys differ from the candidates",
            ));
        }
    }
    let ne = candidates.events.len();
    let np = candidates.pairs.len();
    let mut objective = Vec::with_capacity(2 * ne + 7 * np);
    for &k in &candidates.events {
        let s = scores.events[&k];
        let gold = loss_augment.map(|g| g.events[&k]);
        for label in EventLabel::ALL {
            let mut c = c_event * s[label.index()];
            if gold.is_some_and(|g| g != label) {
                c += 1.0;
            }
            objective.push(c);
        }
    }
    for p in &candidates.pairs {
        let s = scores.relations[p];
        let gold = loss_augment.map(|g| g.relations[p]);
        for label in RelationLabel::ALL {
            let mut c = s[label.index()];
            if gold.is_some_and(|g| g != label) {
                c += 1.0;
            }
            objective.push(c);
        }
    }

    let mut inst = IlpInstance {
        candidates: candidates.clone(),
        objective,
        rows: Vec::new(),
        fixed: Vec::new(),
    };
    for g in 0..inst.num_groups() {
        inst.rows.push(Row {
            kind: RowKind::OneLabel,
            terms: inst.group(g).map(|v| (v, 1)).collect(),
            sense: Sense::Eq,
            rhs: 1,
        });
    }

    if constraints.consistency {
        let slot_of = |k: usize| candidates.events.binary_search(&k).expect("pair endpoint");
        for (p, &(i, j)) in candidates.pairs.iter().enumerate() {
            let none = inst.pair_var(p, RelationLabel::None);
            let (si, sj) = (slot_of(i), slot_of(j));
            // e^P >= r^P with r^P = 1 - y^NONE:  -e^P - y^NONE <= -1
            for s in [si, sj] {
                inst.rows.push(Row {
                    kind: RowKind::Consistency,
                    terms: vec![(inst.event_var(s, EventLabel::Event), -1), (none, -1)],
                    sense: Sense::Le,
                    rhs: -1,
                });
            }
            // e^N_i + e^N_j >= r^N
            inst.rows.push(Row {
                kind: RowKind::Consistency,
                terms: vec![
                    (none, 1),
                    (inst.event_var(si, EventLabel::NonEvent), -1),
                    (inst.event_var(sj, EventLabel::NonEvent), -1),
                ],
                sense: Sense::Le,
                rhs: 0,
            });
        }
    }

    if constraints.transitivity {
        let table = CompositionTable::shared();
        let slots = pair_slots(candidates);
        for (i, j, k) in candidates.triples() {
            let (ij, jk, ik) = (slots[&(i, j)], slots[&(j, k)], slots[&(i, k)]);
            for r1 in RelationLabel::POSITIVE {
                for r2 in RelationLabel::POSITIVE {
                    let mut terms = vec![(inst.pair_var(ij, r1), 1), (inst.pair_var(jk, r2), 1)];
                    terms.extend(
                        table
                            .get(r1, r2)
                            .iter()
                            .map(|r3| (inst.pair_var(ik, r3), -1)),
                    );
                    inst.rows.push(Row {
                        kind: RowKind::Transitivity,
                        terms,
                        sense: Sense::Le,
                        rhs: 1,
                    });
                }
            }
        }
    }
    Ok(inst)
}
