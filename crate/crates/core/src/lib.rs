//! Joint extraction of event triggers and the temporal relations between them.
//!
//! Local scorers produce per-token event scores and per-pair relation scores.
//! An exact 0-1 integer program then picks one label for every candidate at
//! once, subject to event-relation consistency and temporal transitivity.
//! Training runs a cross-entropy pipeline stage followed by structural SVM
//! fine-tuning with loss-augmented inference.

pub mod algebra;
pub mod data;
pub mod error;
pub mod eval;
pub mod inference;
pub mod learning;
pub mod scoring;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    generate_candidates, hamming_distance, CandidateSet, Document, EventLabel, JointAssignment,
    Pair, PosFilter, RelationLabel, Token,
};
