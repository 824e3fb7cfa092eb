use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{Mode, TrainConfig};
use super::model::Model;
use super::optim::Sgd;
use crate::error::{Error, Result};
use crate::inference::{build_ilp, objective, solve_exact, Constraints};
use crate::scoring::Gradient;
use crate::scoring::{build_score_table, softmax, JointScorer, PrecomputedEmbeddings, ScoreTable};
use crate::types::{
    generate_candidates, hamming_distance, CandidateSet, Document, EventLabel, JointAssignment,
    Pair, RelationLabel,
};

/// `-weight * ln softmax(scores)[gold]`.
pub fn cross_entropy_loss(scores: &[f64], gold: usize, weight: f64) -> f64 {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    weight * (lse - scores[gold])
}

/// Derivative of [`cross_entropy_loss`] with respect to the scores.
pub fn cross_entropy_gradient(scores: &[f64], gold: usize, weight: f64) -> Vec<f64> {
    let mut g = softmax(scores);
    g[gold] -= 1.0;
    g.iter_mut().for_each(|x| *x *= weight);
    g
}

/// Probability the event scorer gives token `k`.
pub fn event_probability(scorer: &JointScorer, doc: &Document, k: usize) -> Result<f64> {
    Ok(softmax(&scorer.score_event(doc, k)?)[EventLabel::Event.index()])
}

/// Stage-1 relation training pairs for `doc`.
///
/// With `from_gold`, pairs of gold events among the POS-admitted tokens.
/// Otherwise pairs of tokens the event scorer currently calls `EVENT`; a pair
/// with a falsely predicted endpoint is labeled `NONE`.
pub fn relation_examples(
    model: &Model,
    doc: &Document,
    from_gold: bool,
) -> Result<Vec<(Pair, RelationLabel)>> {
    let admitted = generate_candidates(doc, &model.pos_filter());
    let mut events = Vec::new();
    for &k in &admitted.events {
        let keep = if from_gold {
            doc.gold_events.contains(&k)
        } else {
            event_probability(&model.scorer, doc, k)? >= 0.5
        };
        if keep {
            events.push(k);
        }
    }
    Ok(CandidateSet::from_events(doc, events)
        .pairs
        .into_iter()
        .map(|(i, j)| ((i, j), doc.gold_relation(i, j)))
        .collect())
}

fn require_documents(docs: &[Document]) -> Result<()> {
    if docs.is_empty() {
        return Err(Error::Refused("training corpus is empty".into()));
    }
    Ok(())
}

fn shuffled(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}

/// Cross-entropy training of both scorers. Returns the mean per-document loss
/// of every epoch.
pub fn train_stage1(model: &mut Model, docs: &[Document]) -> Result<Vec<f64>> {
    require_documents(docs)?;
    let cfg = model.config.clone();
    let filter = model.pos_filter();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5157_0001);
    let mut opt = Sgd::new(cfg.learning_rate, cfg.decay, cfg.momentum, cfg.l2);
    let mut losses = Vec::with_capacity(cfg.total_epochs);

    for epoch in 0..cfg.total_epochs {
        let from_gold = epoch < cfg.gold_epochs;
        let mut total = 0.0;
        for d in shuffled(docs.len(), &mut rng) {
            let doc = &docs[d];
            let scorer = &model.scorer;
            let mut grad = scorer.zero_gradient();
            let mut loss = 0.0;
            for &k in &generate_candidates(doc, &filter).events {
                let s = scorer.score_event(doc, k)?;
                let gold = usize::from(doc.gold_events.contains(&k));
                loss += cross_entropy_loss(&s, gold, cfg.event_weight);
                let g = cross_entropy_gradient(&s, gold, cfg.event_weight);
                scorer.backprop_event(doc, k, &[g[0], g[1]], 1.0, &mut grad)?;
            }
            for (pair, label) in relation_examples(model, doc, from_gold)? {
                let s = scorer.score_relation(doc, pair.0, pair.1)?;
                let w = cfg.class_weight(label);
                loss += cross_entropy_loss(&s, label.index(), w);
                let g = cross_entropy_gradient(&s, label.index(), w);
                let mut up = [0.0; 7];
                up.copy_from_slice(&g);
                scorer.backprop_relation(doc, pair, &up, 1.0, &mut grad)?;
            }
            opt.step(model.scorer.blocks_mut(), &grad, epoch);
            total += loss;
        }
        let mean = total / docs.len() as f64;
        log::info!("stage 1 epoch {epoch}: loss {mean:.4}");
        losses.push(mean);
    }
    Ok(losses)
}

/// Candidates used by SSVM training and joint prediction: POS-admitted tokens
/// whose event probability reaches `t_event`.
pub fn filtered_candidates(model: &Model, doc: &Document) -> Result<CandidateSet> {
    let admitted = generate_candidates(doc, &model.pos_filter());
    let mut events = Vec::new();
    for &k in &admitted.events {
        if event_probability(&model.scorer, doc, k)? >= model.config.t_event {
            events.push(k);
        }
    }
    Ok(CandidateSet::from_events(doc, events))
}

/// Outcome of loss-augmented inference on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Hinge {
    /// `(c / M) * max(0, Δ + S(ŷ) - S(y))`.
    pub loss: f64,
    pub predicted: JointAssignment,
    pub hamming: usize,
}

/// SSVM hinge of `gold` against the loss-augmented argmax over `candidates`.
pub fn hinge(
    scores: &ScoreTable,
    candidates: &CandidateSet,
    gold: &JointAssignment,
    c: f64,
    c_event: f64,
) -> Result<Hinge> {
    let m = candidates.size();
    if m == 0 {
        return Ok(Hinge {
            loss: 0.0,
            predicted: gold.clone(),
            hamming: 0,
        });
    }
    let inst = build_ilp(scores, candidates, c_event, Some(gold), Constraints::FULL)?;
    let predicted = solve_exact(&inst)?;
    let hamming = hamming_distance(gold, &predicted)?;
    let margin =
        hamming as f64 + objective(scores, &predicted, c_event) - objective(scores, gold, c_event);
    Ok(Hinge {
        loss: c / m as f64 * margin.max(0.0),
        predicted,
        hamming,
    })
}

/// Hinge loss of one document under the stage-2 candidate filter, with the
/// maximally violating assignment. The L2 term is not included.
pub fn ssvm_instance_loss(model: &Model, doc: &Document) -> Result<(f64, JointAssignment)> {
    let candidates = filtered_candidates(model, doc)?;
    let scores = build_score_table(doc, &candidates, &model.scorer)?;
    let gold = doc.gold_assignment(&candidates);
    let h = hinge(
        &scores,
        &candidates,
        &gold,
        model.config.c,
        model.config.c_event,
    )?;
    Ok((h.loss, h.predicted))
}

/// Gradient of `(c / M) * (Δ + S(predicted) - S(gold))` with `predicted` held
/// fixed. Only keys whose labels differ contribute.
pub fn hinge_gradient(
    scorer: &JointScorer,
    doc: &Document,
    candidates: &CandidateSet,
    gold: &JointAssignment,
    predicted: &JointAssignment,
    c: f64,
    c_event: f64,
) -> Result<Gradient> {
    let mut grad = scorer.zero_gradient();
    let m = candidates.size();
    if m == 0 {
        return Ok(grad);
    }
    let scale = c / m as f64;
    for (k, y) in &gold.events {
        let yhat = predicted.events[k];
        if yhat != *y {
            let mut up = [0.0; 2];
            up[yhat.index()] += c_event;
            up[y.index()] -= c_event;
            scorer.backprop_event(doc, *k, &up, scale, &mut grad)?;
        }
    }
    for (p, y) in &gold.relations {
        let yhat = predicted.relations[p];
        if yhat != *y {
            let mut up = [0.0; 7];
            up[yhat.index()] += 1.0;
            up[y.index()] -= 1.0;
            scorer.backprop_relation(doc, *p, &up, scale, &mut grad)?;
        }
    }
    Ok(grad)
}

/// Online subgradient descent on the SSVM hinge. Returns the mean per-document
/// hinge of every epoch.
pub fn train_stage2(model: &mut Model, docs: &[Document]) -> Result<Vec<f64>> {
    require_documents(docs)?;
    let cfg = model.config.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5157_0002);
    let mut opt = Sgd::new(
        cfg.ssvm_learning_rate,
        cfg.ssvm_decay,
        cfg.ssvm_momentum,
        cfg.l2,
    );
    let mut losses = Vec::with_capacity(cfg.ssvm_epochs);
    for epoch in 0..cfg.ssvm_epochs {
        let mut total = 0.0;
        for d in shuffled(docs.len(), &mut rng) {
            let doc = &docs[d];
            let candidates = filtered_candidates(model, doc)?;
            let scores = build_score_table(doc, &candidates, &model.scorer)?;
            let gold = doc.gold_assignment(&candidates);
            let h = hinge(&scores, &candidates, &gold, cfg.c, cfg.c_event)?;
            let grad = if h.loss > 0.0 {
                hinge_gradient(
                    &model.scorer,
                    doc,
                    &candidates,
                    &gold,
                    &h.predicted,
                    cfg.c,
                    cfg.c_event,
                )?
            } else {
                model.scorer.zero_gradient()
            };
            opt.step(model.scorer.blocks_mut(), &grad, epoch);
            total += h.loss;
        }
        let mean = total / docs.len() as f64;
        log::info!("stage 2 epoch {epoch}: hinge {mean:.4}");
        losses.push(mean);
    }
    Ok(losses)
}

/// Per-epoch losses of both stages.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub stage1: Vec<f64>,
    pub stage2: Vec<f64>,
}

/// Builds a model for `mode` and trains it: stage 1 always, stage 2 only for
/// [`Mode::Structured`].
pub fn train(
    config: &TrainConfig,
    mode: Mode,
    docs: &[Document],
    embeddings: Option<Arc<PrecomputedEmbeddings>>,
) -> Result<(Model, TrainLog)> {
    require_documents(docs)?;
    let config = config.clone().with_mode(mode);
    let mut model = Model::new(&config, docs, embeddings)?;
    let mut log = TrainLog {
        stage1: train_stage1(&mut model, docs)?,
        stage2: Vec::new(),
    };
    if mode == Mode::Structured {
        log.stage2 = train_stage2(&mut model, docs)?;
    }
    Ok((model, log))
}
