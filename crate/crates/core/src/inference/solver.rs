//! Depth-first branch-and-bound over label groups.
//!
//! Groups are branched in variable order (events, then pairs), labels in
//! enumeration order. After every branch, rows are propagated to a fixpoint:
//! exactly-one rows, activity bounds of `<=` rows, and a group rule (if a row
//! needs one more of its negative variables set and they all sit in one group,
//! the rest of that group is cleared). The bound of a node is the sum over
//! groups of the best coefficient still available.
//!
//! Because leaves are visited in lexicographic order and the incumbent only
//! moves on a strict improvement, ties resolve to the lexicographically
//! smallest label vector.

use super::ilp::{IlpInstance, Sense};
use crate::error::{Error, Result};
use crate::types::JointAssignment;

const FREE: i8 = -1;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub assignment: JointAssignment,
    /// One label index per group.
    pub choice: Vec<usize>,
    pub objective: f64,
    /// Search nodes expanded.
    pub nodes: usize,
}

struct Search<'a> {
    inst: &'a IlpInstance,
    var_rows: Vec<Vec<usize>>,
    var_group: Vec<usize>,
    groups: Vec<std::ops::Range<usize>>,
    best: Option<(f64, Vec<usize>)>,
    nodes: usize,
}

impl<'a> Search<'a> {
    fn new(inst: &'a IlpInstance) -> Self {
        let n = inst.num_vars();
        let mut var_rows = vec![Vec::new(); n];
        for (r, row) in inst.rows.iter().enumerate() {
            for &(v, _) in &row.terms {
                var_rows[v].push(r);
            }
        }
        let groups: Vec<_> = (0..inst.num_groups()).map(|g| inst.group(g)).collect();
        let mut var_group = vec![0; n];
        for (g, range) in groups.iter().enumerate() {
            for v in range.clone() {
                var_group[v] = g;
            }
        }
        Search {
            inst,
            var_rows,
            var_group,
            groups,
            best: None,
            nodes: 0,
        }
    }

    fn set(&self, state: &mut [i8], v: usize, value: bool, queue: &mut Vec<usize>) -> bool {
        let value = value as i8;
        if state[v] == FREE {
            state[v] = value;
            queue.extend_from_slice(&self.var_rows[v]);
            true
        } else {
            state[v] == value
        }
    }

    /// Propagates rows in `queue` to a fixpoint; false on infeasibility.
    fn propagate(&self, state: &mut [i8], mut queue: Vec<usize>) -> bool {
        let mut forced = Vec::new();
        while let Some(r) = queue.pop() {
            let row = &self.inst.rows[r];
            forced.clear();
            match row.sense {
                Sense::Eq => {
                    // unit coefficients, rhs 1
                    let ones = row.terms.iter().filter(|&&(v, _)| state[v] == 1).count();
                    let free: Vec<usize> = row
                        .terms
                        .iter()
                        .map(|&(v, _)| v)
                        .filter(|&v| state[v] == FREE)
                        .collect();
                    match (ones, free.len()) {
                        (n, _) if n > 1 => return false,
                        (1, _) => forced.extend(free.iter().map(|&v| (v, false))),
                        (0, 0) => return false,
                        (0, 1) => forced.push((free[0], true)),
                        _ => {}
                    }
                }
                Sense::Le => {
                    let mut act = 0;
                    let mut free_neg = 0;
                    for &(v, a) in &row.terms {
                        match state[v] {
                            1 => act += a,
                            FREE if a < 0 => free_neg += 1,
                            _ => {}
                        }
                    }
                    let min_act = act - free_neg;
                    if min_act > row.rhs {
                        return false;
                    }
                    let tight = min_act + 1 > row.rhs;
                    if tight {
                        for &(v, a) in &row.terms {
                            if state[v] == FREE {
                                forced.push((v, a < 0));
                            }
                        }
                    }
                    let need = act - row.rhs;
                    if need >= 1 && !tight {
                        let mut group = None;
                        let mut single = true;
                        for &(v, a) in &row.terms {
                            if a < 0 && state[v] == FREE {
                                let g = self.var_group[v];
                                match group {
                                    None => group = Some(g),
                                    Some(h) if h != g => single = false,
                                    _ => {}
                                }
                            }
                        }
                        if let (Some(g), true) = (group, single) {
                            if need >= 2 {
                                return false;
                            }
                            for v in self.groups[g].clone() {
                                let in_row = row.terms.iter().any(|&(u, a)| u == v && a < 0);
                                if state[v] == FREE && !in_row {
                                    forced.push((v, false));
                                }
                            }
                        }
                    }
                }
            }
            for &(v, value) in &forced {
                if !self.set(state, v, value, &mut queue) {
                    return false;
                }
            }
        }
        true
    }

    fn bound(&self, state: &[i8]) -> f64 {
        let obj = &self.inst.objective;
        let mut total = 0.0;
        for range in &self.groups {
            let mut best = f64::NEG_INFINITY;
            for v in range.clone() {
                match state[v] {
                    1 => {
                        best = obj[v];
                        break;
                    }
                    FREE => best = best.max(obj[v]),
                    _ => {}
                }
            }
            total += best;
        }
        total
    }

    fn prunable(&self, bound: f64) -> bool {
        match &self.best {
            None => false,
            Some((best, _)) => bound <= best - 1e-9 * (1.0 + best.abs()),
        }
    }

    fn dfs(&mut self, state: Vec<i8>) {
        self.nodes += 1;
        let open = self
            .groups
            .iter()
            .position(|range| range.clone().all(|v| state[v] != 1));
        let Some(g) = open else {
            let choice: Vec<usize> = self
                .groups
                .iter()
                .map(|range| range.clone().position(|v| state[v] == 1).expect("decided"))
                .collect();
            let value = self.inst.objective_of(&choice);
            if self.best.as_ref().is_none_or(|(b, _)| value > *b) {
                self.best = Some((value, choice));
            }
            return;
        };
        for v in self.groups[g].clone() {
            if state[v] != FREE {
                continue;
            }
            let mut child = state.clone();
            let mut queue = Vec::new();
            self.set(&mut child, v, true, &mut queue);
            if !self.propagate(&mut child, queue) {
                continue;
            }
            if self.prunable(self.bound(&child)) {
                continue;
            }
            self.dfs(child);
        }
    }
}

/// Exact maximizer of the instance's objective under all of its rows.
pub fn solve(inst: &IlpInstance) -> Result<Solution> {
    let mut search = Search::new(inst);
    let mut state = vec![FREE; inst.num_vars()];
    let mut queue: Vec<usize> = (0..inst.rows.len()).collect();
    for &(v, value) in &inst.fixed {
        if !search.set(&mut state, v, value, &mut queue) {
            return Err(Error::contract("conflicting variable fixings"));
        }
    }
    if search.propagate(&mut state, queue) {
        search.dfs(state);
    }
    let nodes = search.nodes;
    let (objective, choice) = search
        .best
        .ok_or_else(|| Error::contract("instance has no feasible assignment"))?;
    Ok(Solution {
        assignment: inst.decode(&choice),
        choice,
        objective,
        nodes,
    })
}

/// The MAP assignment of `inst`.
pub fn solve_exact(inst: &IlpInstance) -> Result<JointAssignment> {
    solve(inst).map(|s| s.assignment)
}
