//! Pipeline versus structured training on synthetic corpora.
//!
//! Usage: `cargo run --release --example synthetic_experiment -- [noise] [seeds]`

use std::sync::Arc;
use std::time::Instant;

use tempjoint::data::{generate_synthetic, SynthConfig};
use tempjoint::eval::{accumulate_document, event_prf, micro_prf, ConfusionMatrix, MetricProfile};
use tempjoint::inference::Constraints;
use tempjoint::learning::{predict_with, train, train_stage2, Decoding, Mode, Model, TrainConfig};
use tempjoint::Document;

fn f1(model: &Model, docs: &[Document], decoding: Decoding) -> (f64, f64) {
    let mut cm = ConfusionMatrix::default();
    for doc in docs {
        let p = predict_with(model, doc, decoding).unwrap();
        accumulate_document(doc, &p, &mut cm).unwrap();
    }
    (
        micro_prf(&cm, MetricProfile::ExcludeNone.excluded()).f1,
        event_prf(&cm).f1,
    )
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let noise: f64 = args.get(1).map_or(0.9, |s| s.parse().unwrap());
    let seeds: u64 = args.get(2).map_or(4, |s| s.parse().unwrap());
    for seed in 0..seeds {
        let start = Instant::now();
        let corpus = generate_synthetic(&SynthConfig {
            seed,
            documents: 250,
            noise,
            ..SynthConfig::default()
        })
        .unwrap();
        let (train_docs, test_docs) = corpus.documents.split_at(200);
        let emb = Arc::new(corpus.embeddings);
        let env = |k: &str| std::env::var(k).ok().map(|v| v.parse::<f64>().unwrap());
        let mut config = TrainConfig {
            seed,
            ..TrainConfig::default()
        };
        if let Some(v) = env("LR") {
            config.learning_rate = v;
        }
        if let Some(v) = env("EPOCHS") {
            config.total_epochs = v as usize;
        }
        if let Some(v) = env("GOLD") {
            config.gold_epochs = v as usize;
        }
        if let Some(v) = env("SLR") {
            config.ssvm_learning_rate = v;
        }
        if let Some(v) = env("SEP") {
            config.ssvm_epochs = v as usize;
        }
        if let Some(v) = env("CE") {
            config.c_event = v;
        }
        if let Some(v) = env("TEVT") {
            config.t_event = v;
        }
        let (pipeline, log) = train(&config, Mode::Pipeline, train_docs, Some(emb)).unwrap();
        let mut structured = pipeline.clone();
        let hinge = train_stage2(&mut structured, train_docs).unwrap();
        let (p_local, p_ev) = f1(&pipeline, test_docs, Decoding::Local);
        let (s_full, s_ev) = f1(&structured, test_docs, Decoding::Joint(Constraints::FULL));
        let (s_local, _) = f1(&structured, test_docs, Decoding::Local);
        let (s_cons, _) = f1(
            &structured,
            test_docs,
            Decoding::Joint(Constraints::CONSISTENCY_ONLY),
        );
        let (p_full, _) = f1(&pipeline, test_docs, Decoding::Joint(Constraints::FULL));
        println!(
            "seed {seed}: pipeline {p_local:.3} (ev {p_ev:.3}, +ilp {p_full:.3}) structured {s_full:.3} (ev {s_ev:.3}) | no-structure {s_local:.3} consistency {s_cons:.3} | ce {:.3}->{:.3} hinge {:?} | {:.1}s",
            log.stage1[0],
            log.stage1.last().unwrap(),
            hinge,
            start.elapsed().as_secs_f64()
        );
    }
}
