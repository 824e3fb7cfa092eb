use std::collections::HashMap;

use super::ilp::Constraints;
use crate::algebra::CompositionTable;
use crate::error::{Error, Result};
use crate::scoring::ScoreTable;
use crate::types::{CandidateSet, EventLabel, JointAssignment, Pair, RelationLabel};

pub const MAX_BRUTE_EVENTS: usize = 5;
pub const MAX_BRUTE_PAIRS: usize = 8;

/// Exhaustive MAP: every labeling, filtered by the constraints, maximized with
/// the lexicographically smallest label vector winning ties.
///
/// Returns the assignment and its objective.
pub fn brute_force_map(
    scores: &ScoreTable,
    candidates: &CandidateSet,
    c_event: f64,
    loss_augment: Option<&JointAssignment>,
    constraints: Constraints,
) -> Result<(JointAssignment, f64)> {
    if candidates.events.len() > MAX_BRUTE_EVENTS || candidates.pairs.len() > MAX_BRUTE_PAIRS {
        return Err(Error::Refused(format!(
            "brute force is limited to {MAX_BRUTE_EVENTS} events and {MAX_BRUTE_PAIRS} pairs"
        )));
    }
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

    // per-key coefficient of every label
    let mut coef: Vec<Vec<f64>> = Vec::new();
    for &k in &candidates.events {
        let s = scores.events[&k];
        coef.push(
            EventLabel::ALL
                .iter()
                .map(|&l| {
                    let base = c_event * s[l.index()];
                    match loss_augment {
                        Some(g) if g.events[&k] != l => base + 1.0,
                        _ => base,
                    }
                })
                .collect(),
        );
    }
    for p in &candidates.pairs {
        let s = scores.relations[p];
        coef.push(
            RelationLabel::ALL
                .iter()
                .map(|&l| match loss_augment {
                    Some(g) if g.relations[p] != l => s[l.index()] + 1.0,
                    _ => s[l.index()],
                })
                .collect(),
        );
    }

    let checker = Checker::new(candidates, constraints);
    let ne = candidates.events.len();
    let mut labels = vec![0usize; coef.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        if checker.valid(&labels[..ne], &labels[ne..]) {
            let mut total = 0.0;
            for (g, &l) in labels.iter().enumerate() {
                total += coef[g][l];
            }
            if best.as_ref().is_none_or(|(b, _)| total > *b) {
                best = Some((total, labels.clone()));
            }
        }
        // odometer, last key fastest: lexicographic order
        let mut g = labels.len();
        loop {
            if g == 0 {
                let (value, choice) = best.expect("the null assignment is always valid");
                return Ok((decode(candidates, &choice), value));
            }
            g -= 1;
            labels[g] += 1;
            if labels[g] < coef[g].len() {
                break;
            }
            labels[g] = 0;
        }
    }
}

fn decode(candidates: &CandidateSet, choice: &[usize]) -> JointAssignment {
    let ne = candidates.events.len();
    JointAssignment {
        events: candidates
            .events
            .iter()
            .zip(choice)
            .map(|(&k, &l)| (k, EventLabel::ALL[l]))
            .collect(),
        relations: candidates
            .pairs
            .iter()
            .zip(&choice[ne..])
            .map(|(&p, &l)| (p, RelationLabel::ALL[l]))
            .collect(),
    }
}

struct Checker {
    constraints: Constraints,
    /// endpoint event slots per pair slot
    endpoints: Vec<(usize, usize)>,
    /// (ij, jk, ik) pair slots
    triples: Vec<(usize, usize, usize)>,
    table: &'static CompositionTable,
}

impl Checker {
    fn new(candidates: &CandidateSet, constraints: Constraints) -> Self {
        let event_slot: HashMap<usize, usize> = candidates
            .events
            .iter()
            .enumerate()
            .map(|(s, &k)| (k, s))
            .collect();
        let pair_slot: HashMap<Pair, usize> = candidates
            .pairs
            .iter()
            .enumerate()
            .map(|(s, &p)| (p, s))
            .collect();
        let endpoints = candidates
            .pairs
            .iter()
            .map(|(i, j)| (event_slot[i], event_slot[j]))
            .collect();
        let mut triples = Vec::new();
        for &(i, j) in &candidates.pairs {
            for &(a, k) in &candidates.pairs {
                if a == j {
                    if let Some(&ik) = pair_slot.get(&(i, k)) {
                        triples.push((pair_slot[&(i, j)], pair_slot[&(j, k)], ik));
                    }
                }
            }
        }
        Checker {
            constraints,
            endpoints,
            triples,
            table: CompositionTable::shared(),
        }
    }

    fn valid(&self, events: &[usize], pairs: &[usize]) -> bool {
        let none = RelationLabel::None.index();
        let event = EventLabel::Event.index();
        if self.constraints.consistency {
            for (p, &(a, b)) in self.endpoints.iter().enumerate() {
                let both = events[a] == event && events[b] == event;
                if (pairs[p] != none) != both {
                    return false;
                }
            }
        }
        if self.constraints.transitivity {
            for &(ij, jk, ik) in &self.triples {
                let (r1, r2, r3) = (pairs[ij], pairs[jk], pairs[ik]);
                // matches the transitivity rows: NONE on (i, k) is outside every set
                if r1 == none || r2 == none {
                    continue;
                }
                let set = self
                    .table
                    .get(RelationLabel::ALL[r1], RelationLabel::ALL[r2]);
                if !set.contains(RelationLabel::ALL[r3]) {
                    return false;
                }
            }
        }
        true
    }
}
