//! Corpus files, dataset statistics and the synthetic corpus generator.

mod corpus;
mod stats;
mod synth;

pub use corpus::{
    load_corpus, read_corpus, read_predictions, save_corpus, write_corpus, write_predictions,
};
pub use stats::{dataset_stats, SplitStats};
pub use synth::{generate_synthetic, SynthConfig, SyntheticCorpus};
