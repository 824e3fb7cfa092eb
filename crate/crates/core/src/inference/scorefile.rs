//! Plain-text score files for offline inference.
//!
//! ```text
//! EVENTS n PAIRS m
//! k s_nonevent s_event                      (n lines)
//! i j s_before s_after s_includes s_is_included s_simultaneous s_vague s_none   (m lines)
//! ```

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::scoring::ScoreTable;
use crate::types::CandidateSet;

fn numbers<T: std::str::FromStr>(line: &str, n: usize, what: &str) -> Result<Vec<T>, String> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != n {
        return Err(format!(
            "{what} line needs {n} fields, found {}",
            fields.len()
        ));
    }
    fields
        .iter()
        .map(|f| f.parse::<T>().map_err(|_| format!("bad number {f:?}")))
        .collect()
}

pub fn read_score_file(reader: impl BufRead) -> Result<(CandidateSet, ScoreTable)> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l))
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));

    let (n, header) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing EVENTS/PAIRS header"))?;
    let header = header?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let (events, pairs) = match h.as_slice() {
        ["EVENTS", e, "PAIRS", p] => (
            e.parse::<usize>()
                .map_err(|_| Error::parse(n, "bad event count"))?,
            p.parse::<usize>()
                .map_err(|_| Error::parse(n, "bad pair count"))?,
        ),
        _ => return Err(Error::parse(n, "expected `EVENTS n PAIRS m`")),
    };

    let mut table = ScoreTable::default();
    let mut candidates = CandidateSet::default();
    for _ in 0..events {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Error::parse(n + 1, "missing event line"))?;
        let line = line?;
        let mut f = line.split_whitespace();
        let k = f
            .next()
            .and_then(|k| k.parse::<usize>().ok())
            .ok_or_else(|| Error::parse(n, "bad token index"))?;
        let rest: Vec<&str> = f.collect();
        let s: Vec<f64> = numbers(&rest.join(" "), 2, "event").map_err(|m| Error::parse(n, m))?;
        if table.events.insert(k, [s[0], s[1]]).is_some() {
            return Err(Error::parse(n, format!("duplicate event {k}")));
        }
        candidates.events.push(k);
    }
    for _ in 0..pairs {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Error::parse(n + 1, "missing pair line"))?;
        let line = line?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 9 {
            return Err(Error::parse(
                n,
                format!("pair line needs 9 fields, found {}", f.len()),
            ));
        }
        let ij: Vec<usize> =
            numbers(&f[..2].join(" "), 2, "pair").map_err(|m| Error::parse(n, m))?;
        let s: Vec<f64> = numbers(&f[2..].join(" "), 7, "pair").map_err(|m| Error::parse(n, m))?;
        let (i, j) = (ij[0], ij[1]);
        if i >= j {
            return Err(Error::parse(n, format!("pair ({i}, {j}) must have i < j")));
        }
        if !table.events.contains_key(&i) || !table.events.contains_key(&j) {
            return Err(Error::parse(
                n,
                format!("pair ({i}, {j}) has an undeclared endpoint"),
            ));
        }
        let mut v = [0.0; 7];
        v.copy_from_slice(&s);
        if table.relations.insert((i, j), v).is_some() {
            return Err(Error::parse(n, format!("duplicate pair ({i}, {j})")));
        }
        candidates.pairs.push((i, j));
    }
    if let Some((n, _)) = lines.next() {
        return Err(Error::parse(n, "trailing content after the declared lines"));
    }
    candidates.events.sort_unstable();
    candidates.pairs.sort_unstable();
    Ok((candidates, table))
}

pub fn write_score_file(
    mut w: impl Write,
    candidates: &CandidateSet,
    scores: &ScoreTable,
) -> Result<()> {
    writeln!(
        w,
        "EVENTS {} PAIRS {}",
        candidates.events.len(),
        candidates.pairs.len()
    )?;
    for &k in &candidates.events {
        let s = scores.events[&k];
        writeln!(w, "{k} {} {}", s[0], s[1])?;
    }
    for &(i, j) in &candidates.pairs {
        write!(w, "{i} {j}")?;
        for s in scores.relations[&(i, j)] {
            write!(w, " {s}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}
