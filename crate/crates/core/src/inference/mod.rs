//! Joint MAP inference as a 0-1 integer program.
//!
//! The objective sums relation scores and `c_event`-weighted event scores of
//! the chosen labels. Rows enforce one label per candidate, event-relation
//! consistency (a pair is positive iff both endpoints are events) and
//! transitivity over every triple whose three pairs are candidates.

mod brute;
mod ilp;
mod scorefile;
mod solver;
mod validity;

pub use brute::{brute_force_map, MAX_BRUTE_EVENTS, MAX_BRUTE_PAIRS};
pub use ilp::{build_ilp, Constraints, IlpInstance, Row, RowKind, Sense};
pub use scorefile::{read_score_file, write_score_file};
pub use solver::{solve, solve_exact, Solution};
pub use validity::{check_validity, Key, Violation, ViolationKind};

use rand::seq::index::sample;
use rand::Rng;

use crate::error::Result;
use crate::scoring::ScoreTable;
use crate::types::{CandidateSet, EventLabel, JointAssignment};

/// Plain objective of `assignment`: relation scores plus `c_event` times event
/// scores, accumulated in key order.
pub fn objective(scores: &ScoreTable, assignment: &JointAssignment, c_event: f64) -> f64 {
    let mut total = 0.0;
    for (k, l) in &assignment.events {
        total += c_event * scores.events[k][l.index()];
    }
    for (p, l) in &assignment.relations {
        total += scores.relations[p][l.index()];
    }
    total
}

/// Builds and solves the MAP problem, fixing `non_events` to `NON_EVENT`.
pub fn map_inference(
    scores: &ScoreTable,
    candidates: &CandidateSet,
    c_event: f64,
    constraints: Constraints,
    non_events: &[usize],
) -> Result<Solution> {
    let mut inst = build_ilp(scores, candidates, c_event, None, constraints)?;
    for &k in non_events {
        inst.fix_non_event(k)?;
    }
    solve(&inst)
}

/// A random instance for solver testing: `1..=max_events` candidate tokens
/// `0, 1, ..`, a random subset of at most `max_pairs` of their pairs, and
/// scores uniform in `[-scale, scale]`.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    max_events: usize,
    max_pairs: usize,
    scale: f64,
) -> (CandidateSet, ScoreTable) {
    let n = rng.random_range(1..=max_events.max(1));
    let all: Vec<_> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let m = rng.random_range(0..=max_pairs.min(all.len()));
    let mut picked: Vec<_> = sample(rng, all.len(), m)
        .into_iter()
        .map(|i| all[i])
        .collect();
    picked.sort_unstable();
    let candidates = CandidateSet {
        events: (0..n).collect(),
        pairs: picked,
    };
    let mut scores = ScoreTable::default();
    for &k in &candidates.events {
        scores
            .events
            .insert(k, [0; 2].map(|_| rng.random_range(-scale..=scale)));
    }
    for &p in &candidates.pairs {
        scores
            .relations
            .insert(p, [0; 7].map(|_| rng.random_range(-scale..=scale)));
    }
    (candidates, scores)
}

/// Local argmax per key with no global constraints.
pub fn independent_argmax(scores: &ScoreTable) -> JointAssignment {
    JointAssignment {
        events: scores
            .events
            .iter()
            .map(|(&k, s)| (k, EventLabel::ALL[crate::scoring::argmax(s)]))
            .collect(),
        relations: scores
            .relations
            .iter()
            .map(|(&p, s)| (p, crate::scoring::best_relation(s)))
            .collect(),
    }
}
