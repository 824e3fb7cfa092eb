//! Relation inverses and the transitivity (composition) table.
//!
//! Definite labels are read as constraints on interval endpoints:
//!
//! | label          | meaning for `(a, b)`                 |
//! |----------------|--------------------------------------|
//! | `BEFORE`       | `end(a) < start(b)`                  |
//! | `AFTER`        | `end(b) < start(a)`                  |
//! | `INCLUDES`     | `start(a) < start(b)`, `end(b) < end(a)` |
//! | `IS_INCLUDED`  | `start(b) < start(a)`, `end(a) < end(b)` |
//! | `SIMULTANEOUS` | equal starts and equal ends          |
//!
//! `VAGUE` carries no endpoint constraint. A composition set contains `VAGUE`
//! whenever it is not a single definite label, or when either input is `VAGUE`.
//!
//! [`CompositionTable::derive`] builds the table by checking consistency of
//! point-ordering networks; [`oracle_compose`] gets the same sets by placing
//! three intervals on a small integer grid in every possible way.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::types::RelationLabel;

/// Reverses a relation: the label of `(j, i)` given the label of `(i, j)`.
pub fn inverse(r: RelationLabel) -> RelationLabel {
    use RelationLabel::*;
    match r {
        Before => After,
        After => Before,
        Includes => IsIncluded,
        IsIncluded => Includes,
        Simultaneous => Simultaneous,
        Vague => Vague,
        None => None,
    }
}

/// A small set of relation labels.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LabelSet(u8);

impl LabelSet {
    pub const EMPTY: LabelSet = LabelSet(0);
    pub const ALL: LabelSet = LabelSet(0b111_1111);
    pub const POSITIVE: LabelSet = LabelSet(0b011_1111);

    pub fn single(r: RelationLabel) -> Self {
        LabelSet(1 << r.index())
    }

    pub fn contains(self, r: RelationLabel) -> bool {
        self.0 & (1 << r.index()) != 0
    }

    pub fn insert(&mut self, r: RelationLabel) {
        self.0 |= 1 << r.index();
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn iter(self) -> impl Iterator<Item = RelationLabel> {
        RelationLabel::ALL
            .into_iter()
            .filter(move |&r| self.contains(r))
    }
}

impl FromIterator<RelationLabel> for LabelSet {
    fn from_iter<I: IntoIterator<Item = RelationLabel>>(iter: I) -> Self {
        let mut s = LabelSet::EMPTY;
        for r in iter {
            s.insert(r);
        }
        s
    }
}

impl fmt::Debug for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.iter().map(RelationLabel::as_str).collect();
        f.write_str(&names.join(","))
    }
}

const DEFINITE: [RelationLabel; 5] = [
    RelationLabel::Before,
    RelationLabel::After,
    RelationLabel::Includes,
    RelationLabel::IsIncluded,
    RelationLabel::Simultaneous,
];

fn with_vague_rule(definite: LabelSet, r1: RelationLabel, r2: RelationLabel) -> LabelSet {
    let mut out = definite;
    if definite.len() != 1 || r1 == RelationLabel::Vague || r2 == RelationLabel::Vague {
        out.insert(RelationLabel::Vague);
    }
    out
}

fn require_positive(r: RelationLabel) -> Result<()> {
    if r.is_positive() {
        Ok(())
    } else {
        Err(Error::contract("NONE has no composition"))
    }
}

/// `Trans(r1, r2)` for every ordered pair of positive labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionTable {
    entries: [[LabelSet; 6]; 6],
}

#[derive(Clone, Copy)]
enum PointRel {
    Less,
    Equal,
}

/// Endpoint constraints for `r(a, b)`; points are `2 * interval + {0: start, 1: end}`.
fn endpoint_constraints(r: RelationLabel, a: usize, b: usize) -> Vec<(usize, PointRel, usize)> {
    use PointRel::*;
    let (sa, ea, sb, eb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
    match r {
        RelationLabel::Before => vec![(ea, Less, sb)],
        RelationLabel::After => vec![(eb, Less, sa)],
        RelationLabel::Includes => vec![(sa, Less, sb), (eb, Less, ea)],
        RelationLabel::IsIncluded => vec![(sb, Less, sa), (ea, Less, eb)],
        RelationLabel::Simultaneous => vec![(sa, Equal, sb), (ea, Equal, eb)],
        RelationLabel::Vague | RelationLabel::None => vec![],
    }
}

/// Whether a conjunction of `<` and `=` constraints over 6 points has a solution:
/// merge `=` classes, then the `<` graph over classes must be acyclic.
#[allow(clippy::needless_range_loop)]
fn points_consistent(constraints: &[(usize, PointRel, usize)]) -> bool {
    const N: usize = 6;
    let mut class: [usize; N] = std::array::from_fn(|i| i);
    fn find(class: &mut [usize; N], mut x: usize) -> usize {
        while class[x] != x {
            class[x] = class[class[x]];
            x = class[x];
        }
        x
    }
    for &(a, rel, b) in constraints {
        if let PointRel::Equal = rel {
            let (ra, rb) = (find(&mut class, a), find(&mut class, b));
            class[ra] = rb;
        }
    }
    let mut less = [[false; N]; N];
    for &(a, rel, b) in constraints {
        if let PointRel::Less = rel {
            let (ra, rb) = (find(&mut class, a), find(&mut class, b));
            less[ra][rb] = true;
        }
    }
    // transitive closure; a cycle shows up as x < x
    for k in 0..N {
        for i in 0..N {
            if less[i][k] {
                for j in 0..N {
                    if less[k][j] {
                        less[i][j] = true;
                    }
                }
            }
        }
    }
    (0..N).all(|i| !less[i][i])
}

impl CompositionTable {
    /// Derives every entry from endpoint-ordering consistency.
    pub fn derive() -> Self {
        let mut entries = [[LabelSet::EMPTY; 6]; 6];
        for r1 in RelationLabel::POSITIVE {
            for r2 in RelationLabel::POSITIVE {
                let mut base = vec![
                    (0, PointRel::Less, 1),
                    (2, PointRel::Less, 3),
                    (4, PointRel::Less, 5),
                ];
                base.extend(endpoint_constraints(r1, 0, 1));
                base.extend(endpoint_constraints(r2, 1, 2));
                let definite: LabelSet = DEFINITE
                    .into_iter()
                    .filter(|&r3| {
                        let mut all = base.clone();
                        all.extend(endpoint_constraints(r3, 0, 2));
                        points_consistent(&all)
                    })
                    .collect();
                entries[r1.index()][r2.index()] = with_vague_rule(definite, r1, r2);
            }
        }
        CompositionTable { entries }
    }

    /// The process-wide table, derived on first use.
    pub fn shared() -> &'static CompositionTable {
        static TABLE: OnceLock<CompositionTable> = OnceLock::new();
        TABLE.get_or_init(CompositionTable::derive)
    }

    /// Panics if either label is `NONE`; use [`compose`] for a checked lookup.
    pub fn get(&self, r1: RelationLabel, r2: RelationLabel) -> LabelSet {
        self.entries[r1.index()][r2.index()]
    }

    /// One row per ordered pair: `r1 <TAB> r2 <TAB> comma-separated set`,
    /// sorted by label name.
    pub fn to_tsv(&self) -> String {
        tsv_rows(|r1, r2| self.get(r1, r2))
    }
}

pub(crate) fn tsv_rows(entry: impl Fn(RelationLabel, RelationLabel) -> LabelSet) -> String {
    let mut rows = Vec::with_capacity(36);
    for r1 in RelationLabel::POSITIVE {
        for r2 in RelationLabel::POSITIVE {
            rows.push(format!("{r1}\t{r2}\t{}", entry(r1, r2)));
        }
    }
    rows.sort();
    let mut out = rows.join("\n");
    out.push('\n');
    out
}

/// Labels allowed on `(i, k)` given `r1` on `(i, j)` and `r2` on `(j, k)`.
pub fn compose(r1: RelationLabel, r2: RelationLabel) -> Result<LabelSet> {
    require_positive(r1)?;
    require_positive(r2)?;
    Ok(CompositionTable::shared().get(r1, r2))
}

/// Largest grid coordinate used by [`oracle_compose`].
pub const ORACLE_GRID: i32 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub start: i32,
    pub end: i32,
}

impl Interval {
    /// The definite relation of `self` to `other`, if any.
    pub fn relation_to(self, other: Interval) -> Option<RelationLabel> {
        if self.end < other.start {
            Some(RelationLabel::Before)
        } else if other.end < self.start {
            Some(RelationLabel::After)
        } else if self.start == other.start && self.end == other.end {
            Some(RelationLabel::Simultaneous)
        } else if self.start < other.start && other.end < self.end {
            Some(RelationLabel::Includes)
        } else if other.start < self.start && self.end < other.end {
            Some(RelationLabel::IsIncluded)
        } else {
            None
        }
    }

    fn satisfies(self, other: Interval, r: RelationLabel) -> bool {
        r == RelationLabel::Vague || self.relation_to(other) == Some(r)
    }
}

/// Composition by exhaustive placement of three intervals with endpoints in
/// `0..=ORACLE_GRID`.
pub fn oracle_compose(r1: RelationLabel, r2: RelationLabel) -> Result<LabelSet> {
    require_positive(r1)?;
    require_positive(r2)?;
    let intervals: Vec<Interval> = (0..=ORACLE_GRID)
        .flat_map(|s| (s + 1..=ORACLE_GRID).map(move |e| Interval { start: s, end: e }))
        .collect();
    let mut definite = LabelSet::EMPTY;
    for &a in &intervals {
        for &b in &intervals {
            if !a.satisfies(b, r1) {
                continue;
            }
            for &c in &intervals {
                if b.satisfies(c, r2) {
                    if let Some(r3) = a.relation_to(c) {
                        definite.insert(r3);
                    }
                }
            }
        }
    }
    Ok(with_vague_rule(definite, r1, r2))
}

/// Comment lines heading the golden file.
pub fn golden_header() -> String {
    format!(
        "# r1\tr2\tTrans(r1, r2): labels allowed on (i, k) given r1 on (i, j) and r2 on (j, k)\n\
         # generated by exhaustive placement of three intervals on the grid 0..={ORACLE_GRID}\n\
         # VAGUE convention: VAGUE is added whenever more than one definite label is realizable\n\
         # or either input is VAGUE. Published tables may instead list VAGUE only for inputs\n\
         # that are themselves VAGUE; rows affected by that difference are those with two or\n\
         # more definite labels.\n"
    )
}

/// The oracle's table in golden-file form.
pub fn oracle_tsv() -> String {
    tsv_rows(|r1, r2| oracle_compose(r1, r2).expect("positive labels"))
}
