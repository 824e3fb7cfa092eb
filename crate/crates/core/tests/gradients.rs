//! Finite-difference checks of the scorer and hinge gradients.

#![allow(clippy::needless_range_loop)]

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempjoint::data::{generate_synthetic, SynthConfig};
use tempjoint::inference::objective;
use tempjoint::learning::{filtered_candidates, hinge, hinge_gradient, Model, TrainConfig};
use tempjoint::scoring::{build_score_table, Scorer, ScorerKind};

const H: f64 = 1e-6;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-5)
}

fn check_scorer(kind: ScorerKind, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs = rng.random_range(1..6);
    let hidden = rng.random_range(1..5);
    let outputs = rng.random_range(2..8);
    let mut s = Scorer::random(kind, inputs, hidden, outputs, &mut rng);
    for p in &mut s.params {
        *p += rng.random_range(-0.1..0.1);
    }
    let f: Vec<f64> = (0..inputs).map(|_| rng.random_range(-1.0..1.0)).collect();
    let up: Vec<f64> = (0..outputs).map(|_| rng.random_range(-1.0..1.0)).collect();
    let value = |s: &Scorer, f: &[f64]| -> f64 {
        s.score(f)
            .unwrap()
            .iter()
            .zip(&up)
            .map(|(a, b)| a * b)
            .sum()
    };
    let (dp, df) = s.gradient(&f, &up).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..s.params.len() {
        let orig = s.params[i];
        s.params[i] = orig + H;
        let plus = value(&s, &f);
        s.params[i] = orig - H;
        let minus = value(&s, &f);
        s.params[i] = orig;
        worst = worst.max(rel_err(dp[i], (plus - minus) / (2.0 * H)));
    }
    for i in 0..inputs {
        let mut a = f.clone();
        let mut b = f.clone();
        a[i] += H;
        b[i] -= H;
        worst = worst.max(rel_err(df[i], (value(&s, &a) - value(&s, &b)) / (2.0 * H)));
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn linear_scorer_gradient(seed in any::<u64>()) {
        prop_assert!(check_scorer(ScorerKind::Linear, seed) < 1e-4);
    }

    #[test]
    fn mlp_scorer_gradient(seed in any::<u64>()) {
        prop_assert!(check_scorer(ScorerKind::Mlp, seed) < 1e-4);
    }
}

/// Hinge with the violator frozen, checked over every trainable parameter of a
/// small lookup-encoder model.
#[test]
fn hinge_gradient_matches_differences() {
    let mut checked = 0;
    for seed in 0..10u64 {
        let corpus = generate_synthetic(&SynthConfig {
            seed,
            documents: 2,
            sentences: 2,
            tokens_per_sentence: 2,
            ..SynthConfig::default()
        })
        .unwrap();
        let docs = corpus.documents;
        let emb = Arc::new(corpus.embeddings);
        for lookup in [false, true] {
            let cfg = TrainConfig {
                seed,
                hidden: 4,
                embedding_dim: 3,
                t_event: 0.0,
                shared_encoder: seed % 2 == 0,
                ..TrainConfig::default()
            };
            let mut model = Model::new(&cfg, &docs, (!lookup).then(|| emb.clone())).unwrap();
            let doc = &docs[0];
            let c = filtered_candidates(&model, doc).unwrap();
            if c.size() == 0 || c.pairs.len() > 6 {
                continue;
            }
            let gold = doc.gold_assignment(&c);
            let scores = build_score_table(doc, &c, &model.scorer).unwrap();
            let h = hinge(&scores, &c, &gold, 1.0, cfg.c_event).unwrap();
            let yhat = h.predicted;
            let m = c.size() as f64;
            let frozen = |model: &Model| {
                let s = build_score_table(doc, &c, &model.scorer).unwrap();
                (h.hamming as f64 + objective(&s, &yhat, cfg.c_event)
                    - objective(&s, &gold, cfg.c_event))
                    / m
            };
            let g = hinge_gradient(&model.scorer, doc, &c, &gold, &yhat, 1.0, cfg.c_event).unwrap();
            for b in 0..g.len() {
                for i in 0..g[b].len() {
                    let orig = model.scorer.blocks()[b][i];
                    model.scorer.blocks_mut()[b][i] = orig + H;
                    let plus = frozen(&model);
                    model.scorer.blocks_mut()[b][i] = orig - H;
                    let minus = frozen(&model);
                    model.scorer.blocks_mut()[b][i] = orig;
                    let fd = (plus - minus) / (2.0 * H);
                    assert!(
                        rel_err(g[b][i], fd) < 1e-3,
                        "block {b} param {i}: {} vs {fd}",
                        g[b][i]
                    );
                }
            }
            checked += 1;
        }
    }
    assert!(checked >= 5, "only {checked} instances checked");
}
