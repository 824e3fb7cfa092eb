//! Confusion matrices and micro-averaged precision, recall and F1.
//!
//! With `S1` the number of predictions whose label is not excluded, `S2` the
//! number of gold pairs whose label is not excluded and `correct` the diagonal
//! over non-excluded labels: `P = correct / S1`, `R = correct / S2`,
//! `F1 = 2PR / (P + R)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::LabelSet;
use crate::error::{Error, Result};
use crate::types::{
    generate_candidates, Document, EventLabel, JointAssignment, PosFilter, RelationLabel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MetricProfile {
    /// Drop `NONE` only.
    #[serde(rename = "exclude-none")]
    ExcludeNone,
    /// Drop `NONE` and `VAGUE`.
    #[serde(rename = "exclude-none-vague")]
    ExcludeNoneVague,
}

impl MetricProfile {
    pub fn excluded(self) -> LabelSet {
        match self {
            MetricProfile::ExcludeNone => LabelSet::single(RelationLabel::None),
            MetricProfile::ExcludeNoneVague => [RelationLabel::None, RelationLabel::Vague]
                .into_iter()
                .collect(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MetricProfile::ExcludeNone => "exclude-none",
            MetricProfile::ExcludeNoneVague => "exclude-none-vague",
        }
    }
}

impl FromStr for MetricProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exclude-none" => Ok(MetricProfile::ExcludeNone),
            "exclude-none-vague" => Ok(MetricProfile::ExcludeNoneVague),
            _ => Err(Error::Config(format!("unknown metric profile {s:?}"))),
        }
    }
}

/// Gold-by-predicted counts: rows are gold labels, columns predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub relations: [[u64; 7]; 7],
    pub events: [[u64; 2]; 2],
}

impl ConfusionMatrix {
    pub fn record_relation(&mut self, gold: RelationLabel, pred: RelationLabel) {
        self.relations[gold.index()][pred.index()] += 1;
    }

    pub fn record_event(&mut self, gold: EventLabel, pred: EventLabel) {
        self.events[gold.index()][pred.index()] += 1;
    }

    pub fn total_relations(&self) -> u64 {
        self.relations.iter().flatten().sum()
    }

    pub fn row_sum(&self, gold: RelationLabel) -> u64 {
        self.relations[gold.index()].iter().sum()
    }

    pub fn column_sum(&self, pred: RelationLabel) -> u64 {
        self.relations.iter().map(|row| row[pred.index()]).sum()
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self
            .relations
            .iter_mut()
            .flatten()
            .zip(other.relations.iter().flatten())
        {
            *a += b;
        }
        for (a, b) in self
            .events
            .iter_mut()
            .flatten()
            .zip(other.events.iter().flatten())
        {
            *a += b;
        }
    }
}

/// One increment per key of `gold`.
pub fn accumulate(
    gold: &JointAssignment,
    pred: &JointAssignment,
    cm: &mut ConfusionMatrix,
) -> Result<()> {
    if !gold.same_keys(pred) {
        return Err(Error::contract(
            "gold and predicted assignments have different keys",
        ));
    }
    for (g, p) in gold.events.values().zip(pred.events.values()) {
        cm.record_event(*g, *p);
    }
    for (g, p) in gold.relations.values().zip(pred.relations.values()) {
        cm.record_relation(*g, *p);
    }
    Ok(())
}

/// Scores `pred` against `doc` over every token and every same-or-adjacent
/// sentence pair. Keys missing from `pred` count as `NON_EVENT` / `NONE`.
pub fn accumulate_document(
    doc: &Document,
    pred: &JointAssignment,
    cm: &mut ConfusionMatrix,
) -> Result<()> {
    let space = generate_candidates(doc, &PosFilter::All);
    if let Some(k) = pred
        .events
        .keys()
        .find(|k| space.events.binary_search(k).is_err())
    {
        return Err(Error::contract(format!(
            "{}: predicted token {k} is not in the document",
            doc.doc_id
        )));
    }
    if let Some(p) = pred
        .relations
        .keys()
        .find(|p| space.pairs.binary_search(p).is_err())
    {
        return Err(Error::contract(format!(
            "{}: predicted pair {p:?} is outside the candidate space",
            doc.doc_id
        )));
    }
    let gold = doc.gold_assignment(&space);
    let full = JointAssignment {
        events: space
            .events
            .iter()
            .map(|k| {
                (
                    *k,
                    pred.events.get(k).copied().unwrap_or(EventLabel::NonEvent),
                )
            })
            .collect(),
        relations: space
            .pairs
            .iter()
            .map(|p| {
                (
                    *p,
                    pred.relations
                        .get(p)
                        .copied()
                        .unwrap_or(RelationLabel::None),
                )
            })
            .collect(),
    };
    accumulate(&gold, &full, cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// A denominator was zero and the affected value was reported as 0.
    pub undefined: bool,
}

fn prf(correct: u64, predicted: u64, gold: u64) -> Prf {
    let mut undefined = false;
    let ratio = |num: u64, den: u64, undefined: &mut bool| {
        if den == 0 {
            *undefined = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(correct, predicted, &mut undefined);
    let recall = ratio(correct, gold, &mut undefined);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Prf {
        precision,
        recall,
        f1,
        undefined,
    }
}

/// Micro-averaged relation P/R/F1 with `excluded` labels removed from both the
/// prediction and the gold totals.
pub fn micro_prf(cm: &ConfusionMatrix, excluded: LabelSet) -> Prf {
    let kept = || {
        RelationLabel::ALL
            .into_iter()
            .filter(|&l| !excluded.contains(l))
    };
    let s1: u64 = kept().map(|l| cm.column_sum(l)).sum();
    let s2: u64 = kept().map(|l| cm.row_sum(l)).sum();
    let correct: u64 = kept().map(|l| cm.relations[l.index()][l.index()]).sum();
    prf(correct, s1, s2)
}

/// P/R/F1 of the `EVENT` class.
pub fn event_prf(cm: &ConfusionMatrix) -> Prf {
    let e = EventLabel::Event.index();
    let n = EventLabel::NonEvent.index();
    let tp = cm.events[e][e];
    prf(tp, tp + cm.events[n][e], tp + cm.events[e][n])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRow {
    pub label: RelationLabel,
    /// `None` when the label was never predicted.
    pub scores: Option<Prf>,
    pub support: u64,
}

/// Per positive label: `P = diag / column`, `R = diag / row`.
pub fn per_label_report(cm: &ConfusionMatrix) -> Vec<LabelRow> {
    RelationLabel::POSITIVE
        .iter()
        .map(|&l| {
            let diag = cm.relations[l.index()][l.index()];
            let col = cm.column_sum(l);
            let row = cm.row_sum(l);
            LabelRow {
                label: l,
                scores: (col > 0).then(|| prf(diag, col, row)),
                support: row,
            }
        })
        .collect()
}

/// Everything `evaluate` prints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub profile: MetricProfile,
    pub documents: usize,
    pub relation: Prf,
    pub event: Prf,
    pub per_label: Vec<LabelRow>,
    pub confusion: ConfusionMatrix,
}

impl Report {
    pub fn new(profile: MetricProfile, documents: usize, cm: ConfusionMatrix) -> Self {
        Report {
            profile,
            documents,
            relation: micro_prf(&cm, profile.excluded()),
            event: event_prf(&cm),
            per_label: per_label_report(&cm),
            confusion: cm,
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |x: f64| x * 100.0;
        writeln!(
            f,
            "documents: {}   metric: {}",
            self.documents,
            self.profile.as_str()
        )?;
        writeln!(f, "{:<14} {:>7} {:>7} {:>7}", "", "P", "R", "F1")?;
        for (name, s) in [("event", self.event), ("relation", self.relation)] {
            writeln!(
                f,
                "{:<14} {:>7.1} {:>7.1} {:>7.1}{}",
                name,
                pct(s.precision),
                pct(s.recall),
                pct(s.f1),
                if s.undefined { "  (undefined)" } else { "" }
            )?;
        }
        writeln!(f)?;
        writeln!(
            f,
            "{:<14} {:>7} {:>7} {:>7} {:>8}",
            "label", "P", "R", "F1", "support"
        )?;
        for row in &self.per_label {
            match row.scores {
                Some(s) => writeln!(
                    f,
                    "{:<14} {:>7.1} {:>7.1} {:>7.1} {:>8}",
                    row.label.as_str(),
                    pct(s.precision),
                    pct(s.recall),
                    pct(s.f1),
                    row.support
                )?,
                None => writeln!(
                    f,
                    "{:<14} {:>7} {:>7} {:>7} {:>8}",
                    row.label.as_str(),
                    "-",
                    "-",
                    "-",
                    row.support
                )?,
            }
        }
        writeln!(f)?;
        write!(f, "{:<13}", "gold \\ pred")?;
        for l in RelationLabel::ALL {
            write!(f, " {:>6}", &l.as_str()[..l.as_str().len().min(6)])?;
        }
        writeln!(f)?;
        for g in RelationLabel::ALL {
            write!(f, "{:<13}", g.as_str())?;
            for p in RelationLabel::ALL {
                write!(f, " {:>6}", self.confusion.relations[g.index()][p.index()])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
