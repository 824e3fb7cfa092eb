//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p tempjoint-cli --test acceptance`.

#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempjoint::algebra::{
    compose, golden_header, inverse, oracle_compose, oracle_tsv, CompositionTable, LabelSet,
};
use tempjoint::data::{generate_synthetic, load_corpus, read_predictions, SynthConfig};
use tempjoint::eval::{accumulate_document, micro_prf, ConfusionMatrix, MetricProfile};
use tempjoint::inference::{
    brute_force_map, build_ilp, check_validity, objective, random_instance, solve, Constraints,
};
use tempjoint::learning::{
    filtered_candidates, hinge, hinge_gradient, predict_with, train, train_stage2, Decoding, Mode,
    Model, TrainConfig,
};
use tempjoint::scoring::{build_score_table, ScoreTable, Scorer, ScorerKind};
use tempjoint::{
    hamming_distance, CandidateSet, Document, EventLabel, JointAssignment, RelationLabel,
};
use tempjoint_cli::{cmd_predict, cmd_synth, cmd_train, RunConfig};

const GOLDEN: &str = include_str!("../../core/tests/golden/composition.tsv");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_gold(rng: &mut ChaCha8Rng, c: &CandidateSet) -> JointAssignment {
    JointAssignment {
        events: c
            .events
            .iter()
            .map(|&k| (k, EventLabel::ALL[rng.random_range(0..2)]))
            .collect(),
        relations: c
            .pairs
            .iter()
            .map(|&p| (p, RelationLabel::ALL[rng.random_range(0..7)]))
            .collect(),
    }
}

fn solver_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut n, mut objective_mismatch, mut assignment_mismatch) = (0, 0, 0);
    for c_event in [0.1, 1.0, 5.0] {
        for _ in 0..400 {
            let (c, s) = random_instance(&mut rng, 4, 6, 1.0);
            let inst = build_ilp(&s, &c, c_event, None, Constraints::FULL).unwrap();
            let sol = solve(&inst).unwrap();
            let (oracle, best) = brute_force_map(&s, &c, c_event, None, Constraints::FULL).unwrap();
            objective_mismatch += usize::from(sol.objective != best);
            assignment_mismatch += usize::from(sol.assignment != oracle);
            n += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        objective_mismatch == 0 && assignment_mismatch == 0 && elapsed < Duration::from_secs(60),
        format!(
            "{n} instances, {objective_mismatch} objective and {assignment_mismatch} assignment mismatches, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn truth_table() -> Outcome {
    let c = CandidateSet {
        events: vec![0, 1],
        pairs: vec![(0, 1)],
    };
    let mut s = ScoreTable::default();
    s.events.insert(0, [0.0; 2]);
    s.events.insert(1, [0.0; 2]);
    s.relations.insert((0, 1), [0.0; 7]);
    let inst = build_ilp(&s, &c, 1.0, None, Constraints::CONSISTENCY_ONLY).unwrap();
    let mut rows = Vec::new();
    let mut ok = true;
    for ei in EventLabel::ALL {
        for ej in EventLabel::ALL {
            let feasible: Vec<RelationLabel> = RelationLabel::ALL
                .into_iter()
                .filter(|&r| {
                    let a = JointAssignment {
                        events: BTreeMap::from([(0, ei), (1, ej)]),
                        relations: BTreeMap::from([((0, 1), r)]),
                    };
                    inst.violated_rows(&inst.values_of(&inst.encode(&a).unwrap()))
                        .is_empty()
                })
                .collect();
            let both = ei == EventLabel::Event && ej == EventLabel::Event;
            let expected = if both {
                RelationLabel::POSITIVE.to_vec()
            } else {
                vec![RelationLabel::None]
            };
            ok &= feasible == expected;
            rows.push(format!(
                "({},{})->{}",
                ei.index(),
                ej.index(),
                if both { "positive" } else { "NONE" }
            ));
        }
    }
    outcome(ok, rows.join(" "))
}

fn transitivity_golden() -> Outcome {
    let mut mismatches = 0;
    let mut incoherent = 0;
    for r1 in RelationLabel::POSITIVE {
        for r2 in RelationLabel::POSITIVE {
            let t = compose(r1, r2).unwrap();
            mismatches += usize::from(t != oracle_compose(r1, r2).unwrap());
            let inv: LabelSet = t.iter().map(inverse).collect();
            incoherent += usize::from(inv != compose(inverse(r2), inverse(r1)).unwrap());
        }
    }
    let file_ok = GOLDEN == format!("{}{}", golden_header(), oracle_tsv())
        && CompositionTable::derive().to_tsv() == oracle_tsv();
    let bb = compose(RelationLabel::Before, RelationLabel::Before).unwrap()
        == LabelSet::single(RelationLabel::Before);
    outcome(
        mismatches == 0 && incoherent == 0 && file_ok && bb,
        format!(
            "36 entries: {mismatches} oracle mismatches, {incoherent} inverse failures, golden file {}, BEFORE.BEFORE={{BEFORE}} {bb}",
            if file_ok { "matches" } else { "differs" }
        ),
    )
}

const H: f64 = 1e-6;

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-5)
}

fn scorer_fd(kind: ScorerKind, rng: &mut ChaCha8Rng) -> f64 {
    let inputs = rng.random_range(1..7);
    let hidden = rng.random_range(1..6);
    let outputs = [2, 7][rng.random_range(0..2)];
    let mut s = Scorer::random(kind, inputs, hidden, outputs, rng);
    for p in &mut s.params {
        *p += rng.random_range(-0.2..0.2);
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
        let (mut a, mut b) = (f.clone(), f.clone());
        a[i] += H;
        b[i] -= H;
        worst = worst.max(rel_err(df[i], (value(&s, &a) - value(&s, &b)) / (2.0 * H)));
    }
    worst
}

/// Worst relative error over all trainable parameters of one small model, with
/// the violator frozen. `None` when the instance has no candidates.
fn hinge_fd(seed: u64) -> Option<(f64, bool)> {
    let corpus = generate_synthetic(&SynthConfig {
        seed,
        documents: 2,
        sentences: 2,
        tokens_per_sentence: 2,
        ..SynthConfig::default()
    })
    .unwrap();
    let docs = corpus.documents;
    let lookup = seed.is_multiple_of(2);
    let cfg = TrainConfig {
        seed,
        hidden: 3,
        embedding_dim: 2,
        t_event: 0.0,
        c_event: [0.1, 1.0, 5.0][seed as usize % 3],
        scorer: if seed.is_multiple_of(3) {
            ScorerKind::Linear
        } else {
            ScorerKind::Mlp
        },
        shared_encoder: seed % 4 < 2,
        ..TrainConfig::default()
    };
    let emb = (!lookup).then(|| Arc::new(corpus.embeddings));
    let mut model = Model::new(&cfg, &docs, emb).unwrap();
    let doc = &docs[0];
    let c = filtered_candidates(&model, doc).unwrap();
    if c.size() == 0 {
        return None;
    }
    let gold = doc.gold_assignment(&c);
    let scores = build_score_table(doc, &c, &model.scorer).unwrap();
    let h = hinge(&scores, &c, &gold, cfg.c, cfg.c_event).unwrap();
    let m = c.size() as f64;
    let frozen = |model: &Model| {
        let s = build_score_table(doc, &c, &model.scorer).unwrap();
        cfg.c / m
            * (h.hamming as f64 + objective(&s, &h.predicted, cfg.c_event)
                - objective(&s, &gold, cfg.c_event))
    };
    let g = hinge_gradient(
        &model.scorer,
        doc,
        &c,
        &gold,
        &h.predicted,
        cfg.c,
        cfg.c_event,
    )
    .unwrap();
    let mut worst: f64 = 0.0;
    for b in 0..g.len() {
        for i in 0..g[b].len() {
            let orig = model.scorer.blocks()[b][i];
            model.scorer.blocks_mut()[b][i] = orig + H;
            let plus = frozen(&model);
            model.scorer.blocks_mut()[b][i] = orig - H;
            let minus = frozen(&model);
            model.scorer.blocks_mut()[b][i] = orig;
            worst = worst.max(rel_err(g[b][i], (plus - minus) / (2.0 * H)));
        }
    }
    Some((worst, h.predicted != gold))
}

fn gradient_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let linear = (0..100)
        .map(|_| scorer_fd(ScorerKind::Linear, &mut rng))
        .fold(0.0, f64::max);
    let mlp = (0..100)
        .map(|_| scorer_fd(ScorerKind::Mlp, &mut rng))
        .fold(0.0, f64::max);
    let (mut hinge_worst, mut n, mut violated) = (0.0f64, 0, 0);
    let mut seed = 0;
    while n < 100 {
        if let Some((e, v)) = hinge_fd(seed) {
            hinge_worst = hinge_worst.max(e);
            n += 1;
            violated += usize::from(v);
        }
        seed += 1;
    }
    outcome(
        linear < 1e-4 && mlp < 1e-4 && hinge_worst < 1e-3,
        format!(
            "max rel err: linear {linear:.1e} (100), mlp {mlp:.1e} (100), hinge {hinge_worst:.1e} ({n}, {violated} with a violator)"
        ),
    )
}

fn metrics() -> Outcome {
    let mut cm = ConfusionMatrix::default();
    cm.record_relation(RelationLabel::Before, RelationLabel::Before);
    cm.record_relation(RelationLabel::Before, RelationLabel::None);
    cm.record_relation(RelationLabel::None, RelationLabel::Before);
    let hand = [MetricProfile::ExcludeNone, MetricProfile::ExcludeNoneVague]
        .into_iter()
        .all(|p| {
            let s = micro_prf(&cm, p.excluded());
            (s.precision, s.recall, s.f1) == (0.5, 0.5, 0.5)
        });
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut dense_ok = 0;
    for _ in 0..200 {
        let mut cm = ConfusionMatrix::default();
        for g in 0..7 {
            for p in 0..7 {
                cm.relations[g][p] = rng.random_range(0..30);
            }
        }
        let s = micro_prf(&cm, LabelSet::EMPTY);
        dense_ok += usize::from(s.precision == s.recall && (s.f1 - s.precision).abs() < 1e-12);
    }
    outcome(
        hand && dense_ok == 200,
        format!("hand example P=R=F1=0.5: {hand}; dense P=R=F1 on {dense_ok}/200 matrices"),
    )
}

fn all_choices(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n).map(move |l| {
                    let mut v = p.clone();
                    v.push(l);
                    v
                })
            })
            .collect();
    }
    out
}

fn loss_augmentation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut checked, mut bad) = (0usize, 0usize);
    for _ in 0..100 {
        let (c, s) = random_instance(&mut rng, 3, 3, 1.0);
        let gold = random_gold(&mut rng, &c);
        let c_event = [0.1, 1.0, 5.0][rng.random_range(0..3)];
        let plain = build_ilp(&s, &c, c_event, None, Constraints::FULL).unwrap();
        let aug = build_ilp(&s, &c, c_event, Some(&gold), Constraints::FULL).unwrap();
        let sizes: Vec<usize> = (0..plain.num_groups())
            .map(|g| plain.group(g).len())
            .collect();
        for choice in all_choices(&sizes) {
            let h = hamming_distance(&plain.decode(&choice), &gold).unwrap() as f64;
            let rhs = plain.objective_of(&choice) + h;
            bad += usize::from((aug.objective_of(&choice) - rhs).abs() > 1e-12 * (1.0 + rhs.abs()));
            checked += 1;
        }
    }
    outcome(
        bad == 0,
        format!("100 instances, {checked} assignments enumerated, {bad} mismatches"),
    )
}

fn relation_f1(model: &Model, docs: &[Document], decoding: Decoding) -> f64 {
    let mut cm = ConfusionMatrix::default();
    for doc in docs {
        let p = predict_with(model, doc, decoding).unwrap();
        accumulate_document(doc, &p, &mut cm).unwrap();
    }
    micro_prf(&cm, MetricProfile::ExcludeNone.excluded()).f1
}

fn synthetic_reproduction() -> Outcome {
    let start = Instant::now();
    let mut held = 0;
    let mut lines = Vec::new();
    for seed in 0..4u64 {
        let corpus = generate_synthetic(&SynthConfig {
            seed,
            documents: 250,
            vague_rate: 0.15,
            ..SynthConfig::default()
        })
        .unwrap();
        let (train_docs, test_docs) = corpus.documents.split_at(200);
        let emb = Arc::new(corpus.embeddings);
        let config = TrainConfig {
            seed,
            ..TrainConfig::default()
        };
        let (pipeline, _) = train(&config, Mode::Pipeline, train_docs, Some(emb)).unwrap();
        let mut structured = pipeline.clone();
        train_stage2(&mut structured, train_docs).unwrap();
        let p = relation_f1(&pipeline, test_docs, Decoding::Local);
        let s = relation_f1(&structured, test_docs, Decoding::Joint(Constraints::FULL));
        let none = relation_f1(&structured, test_docs, Decoding::Local);
        let cons = relation_f1(
            &structured,
            test_docs,
            Decoding::Joint(Constraints::CONSISTENCY_ONLY),
        );
        let ok = (0.4..=0.8).contains(&p) && s >= p && cons >= none;
        held += usize::from(ok);
        lines.push(format!(
            "seed {seed}: pipeline {p:.3} structured {s:.3}, no-structure {none:.3} consistency {cons:.3}{}",
            if ok { "" } else { " (not held)" }
        ));
    }
    let elapsed = start.elapsed();
    outcome(
        held >= 3 && elapsed < Duration::from_secs(600),
        format!(
            "held on {held}/4 seeds in {:.0}s [{}]",
            elapsed.as_secs_f64(),
            lines.join("; ")
        ),
    )
}

/// Shared corpus on disk for the command-level criteria.
struct Workspace {
    _dir: tempfile::TempDir,
    base: RunConfig,
    checkpoint: std::path::PathBuf,
    root: std::path::PathBuf,
}

fn workspace() -> Workspace {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_owned();
    let mut synth = RunConfig::new();
    synth.set("out_dir", root.display().to_string()).unwrap();
    synth.set("seed", "11").unwrap();
    synth.set("synth.documents", "250").unwrap();
    synth.set("synth.test_documents", "50").unwrap();
    cmd_synth(&synth).unwrap();
    let mut base = RunConfig::new();
    base.set("seed", "11").unwrap();
    base.set("mode", "structured").unwrap();
    base.set(
        "embeddings",
        root.join("embeddings.txt").display().to_string(),
    )
    .unwrap();
    Workspace {
        checkpoint: root.join("model.json"),
        base,
        root,
        _dir: dir,
    }
}

fn validity(ws: &Workspace) -> Outcome {
    let mut cfg = ws.base.clone();
    cfg.set("train", ws.root.join("train.jsonl").display().to_string())
        .unwrap();
    cfg.set("checkpoint", ws.checkpoint.display().to_string())
        .unwrap();
    cmd_train(&cfg).unwrap();
    let mut cfg = ws.base.clone();
    cfg.set("checkpoint", ws.checkpoint.display().to_string())
        .unwrap();
    cfg.set("corpus", ws.root.join("test.jsonl").display().to_string())
        .unwrap();
    let out = ws.root.join("predictions.jsonl");
    cfg.set("predictions", out.display().to_string()).unwrap();
    cfg.set("jobs", "2").unwrap();
    cmd_predict(&cfg).unwrap();
    let written =
        read_predictions(std::io::BufReader::new(std::fs::File::open(&out).unwrap())).unwrap();
    let test = load_corpus(ws.root.join("test.jsonl")).unwrap();
    let table = CompositionTable::shared();
    let violations: usize = written
        .iter()
        .map(|(_, a)| check_validity(a, table).len())
        .sum();
    let aligned = written
        .iter()
        .map(|p| &p.0)
        .eq(test.iter().map(|d| &d.doc_id));
    outcome(
        violations == 0 && aligned && written.len() == 50,
        format!(
            "{} predicted documents, {violations} violations, order preserved {aligned}",
            written.len()
        ),
    )
}

fn reproducibility(ws: &Workspace) -> Outcome {
    let mut bytes = Vec::new();
    for run in 0..2 {
        let path = ws.root.join(format!("repeat{run}.json"));
        let mut cfg = ws.base.clone();
        cfg.set("train", ws.root.join("train.jsonl").display().to_string())
            .unwrap();
        cfg.set("checkpoint", path.display().to_string()).unwrap();
        cmd_train(&cfg).unwrap();
        bytes.push(std::fs::read(&path).unwrap());
    }
    let same = bytes[0] == bytes[1];
    outcome(
        same,
        format!(
            "two structured runs, {} bytes each, identical {same}",
            bytes[0].len()
        ),
    )
}

fn main() {
    let mut failures = 0;
    let mut report = |name: &str, o: Outcome| {
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failures += usize::from(!o.pass);
    };
    report("solver-oracle equivalence", solver_oracle());
    report("constraint truth table", truth_table());
    report("transitivity golden file", transitivity_golden());
    report("gradient checks", gradient_checks());
    report("metric correctness", metrics());
    report("loss-augmentation identity", loss_augmentation());
    report(
        "directional synthetic reproduction",
        synthetic_reproduction(),
    );
    let ws = workspace();
    report("validity guarantee", validity(&ws));
    report("reproducibility", reproducibility(&ws));
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
