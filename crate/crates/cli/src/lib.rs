//! Commands behind the `tempjoint` binary. Each `cmd_*` function reads its
//! inputs from a [`RunConfig`] so tests can drive them without a process.

mod config;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use tempjoint::data::{
    dataset_stats, generate_synthetic, load_corpus, read_predictions, save_corpus,
    write_predictions,
};
use tempjoint::eval::{accumulate_document, ConfusionMatrix, Report};
use tempjoint::inference::{map_inference, read_score_file, Constraints};
use tempjoint::learning::{predict, train, Model, TrainLog};
use tempjoint::scoring::PrecomputedEmbeddings;
use tempjoint::{Document, JointAssignment};

pub use config::{RunConfig, KNOWN_KEYS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Input {
        path: PathBuf,
        source: tempjoint::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] tempjoint::Error),
}

fn input<T>(path: &Path, r: tempjoint::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Input {
        path: path.to_owned(),
        source,
    })
}

fn io<T>(path: &Path, r: std::io::Result<T>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    Ok(BufReader::new(io(path, File::open(path))?))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(io(path, File::create(path))?))
}

fn read_corpus_at(path: &Path) -> Result<Vec<Document>, CliError> {
    input(path, load_corpus(path))
}

fn embeddings(cfg: &RunConfig) -> Result<Option<Arc<PrecomputedEmbeddings>>, CliError> {
    match cfg.path("embeddings") {
        Some(p) => {
            let e = input(&p, PrecomputedEmbeddings::read(open(&p)?))?;
            Ok(Some(Arc::new(e)))
        }
        None => Ok(None),
    }
}

/// What `train` produced.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub log: TrainLog,
}

/// One `stage epoch loss` line per epoch.
pub fn format_train_log(log: &TrainLog) -> String {
    let mut out = String::from("stage\tepoch\tloss\n");
    for (stage, losses) in [(1, &log.stage1), (2, &log.stage2)] {
        for (e, l) in losses.iter().enumerate() {
            out.push_str(&format!("{stage}\t{e}\t{l}\n"));
        }
    }
    out
}

/// Trains on `train` and, when `checkpoint` is set, writes the checkpoint and
/// `<checkpoint>.log`.
pub fn cmd_train(cfg: &RunConfig) -> Result<TrainOutcome, CliError> {
    let train_path = cfg.require_path("train")?;
    let docs = read_corpus_at(&train_path)?;
    let config = cfg.train_config()?;
    let mode = cfg.mode()?;
    let (model, log) = train(&config, mode, &docs, embeddings(cfg)?)?;
    if let Some(path) = cfg.path("checkpoint") {
        let mut w = create(&path)?;
        input(&path, model.save(&mut w))?;
        io(&path, w.flush())?;
        let log_path = PathBuf::from(format!("{}.log", path.display()));
        io(&log_path, std::fs::write(&log_path, format_train_log(&log)))?;
    }
    Ok(TrainOutcome { model, log })
}

/// Loads the checkpoint named by `checkpoint`.
pub fn load_model(cfg: &RunConfig) -> Result<Model, CliError> {
    let path = cfg.require_path("checkpoint")?;
    input(&path, Model::load(open(&path)?, embeddings(cfg)?))
}

/// Predicts every document of `corpus` with `jobs` threads, keeping corpus
/// order, and writes them to `predictions` when set.
pub fn cmd_predict(cfg: &RunConfig) -> Result<Vec<(String, JointAssignment)>, CliError> {
    let model = load_model(cfg)?;
    let corpus_path = cfg.require_path("corpus")?;
    let docs = read_corpus_at(&corpus_path)?;
    let predictions = predict_documents(&model, &docs, cfg.jobs()?)?;
    if let Some(path) = cfg.path("predictions") {
        let mut w = create(&path)?;
        input(&path, write_predictions(&mut w, &predictions))?;
        io(&path, w.flush())?;
    }
    Ok(predictions)
}

pub fn predict_documents(
    model: &Model,
    docs: &[Document],
    jobs: usize,
) -> Result<Vec<(String, JointAssignment)>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} workers: {e}")))?;
    let out: tempjoint::Result<Vec<_>> = pool.install(|| {
        docs.par_iter()
            .map(|d| predict(model, d).map(|a| (d.doc_id.clone(), a)))
            .collect()
    });
    Ok(out?)
}

/// Scores `predictions` against the `gold` corpus.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<Report, CliError> {
    let gold_path = cfg.require_path("gold")?;
    let pred_path = cfg.require_path("predictions")?;
    let gold = read_corpus_at(&gold_path)?;
    let preds = input(&pred_path, read_predictions(open(&pred_path)?))?;
    let report = evaluate(&gold, &preds, cfg.metric()?)?;
    if let Some(path) = cfg.path("report_json") {
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Config(format!("cannot serialize report: {e}")))?;
        io(&path, std::fs::write(&path, text + "\n"))?;
    }
    Ok(report)
}

/// Requires one prediction per gold document, matched by id.
pub fn evaluate(
    gold: &[Document],
    predictions: &[(String, JointAssignment)],
    profile: tempjoint::eval::MetricProfile,
) -> Result<Report, CliError> {
    let by_id: std::collections::BTreeMap<&str, &JointAssignment> =
        predictions.iter().map(|(id, a)| (id.as_str(), a)).collect();
    if let Some((id, _)) = predictions
        .iter()
        .find(|(id, _)| !gold.iter().any(|d| &d.doc_id == id))
    {
        return Err(CliError::Config(format!(
            "prediction for unknown document `{id}`"
        )));
    }
    let mut cm = ConfusionMatrix::default();
    for doc in gold {
        let pred = by_id.get(doc.doc_id.as_str()).ok_or_else(|| {
            CliError::Config(format!("no prediction for document `{}`", doc.doc_id))
        })?;
        accumulate_document(doc, pred, &mut cm)?;
    }
    Ok(Report::new(profile, gold.len(), cm))
}

/// MAP assignment of a score file, one line per key, then the objective.
pub fn cmd_solve(path: &Path, c_event: f64) -> Result<String, CliError> {
    let (candidates, scores) = input(path, read_score_file(open(path)?))?;
    let sol = map_inference(&scores, &candidates, c_event, Constraints::FULL, &[])?;
    let mut out = String::new();
    for (k, l) in &sol.assignment.events {
        out.push_str(&format!("event {k} {l}\n"));
    }
    for ((i, j), l) in &sol.assignment.relations {
        out.push_str(&format!("pair {i} {j} {l}\n"));
    }
    out.push_str(&format!("objective {}\n", sol.objective));
    Ok(out)
}

/// Statistics for each corpus file, split named after the file stem.
pub fn cmd_stats(paths: &[PathBuf]) -> Result<String, CliError> {
    let mut out = String::new();
    for p in paths {
        let docs = read_corpus_at(p)?;
        let split = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.push_str(&dataset_stats(&split, &docs).to_string());
        out.push('\n');
    }
    Ok(out)
}

/// Writes `train.jsonl`, `test.jsonl` (the last `synth.test_documents`
/// documents) and `embeddings.txt` under `out_dir`.
pub fn cmd_synth(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let dir = cfg.require_path("out_dir")?;
    let synth = cfg.synth_config()?;
    let test_n = cfg.test_documents()?;
    if test_n > synth.documents {
        return Err(CliError::Config(format!(
            "synth.test_documents ({test_n}) exceeds synth.documents ({})",
            synth.documents
        )));
    }
    let corpus = generate_synthetic(&synth)?;
    io(&dir, std::fs::create_dir_all(&dir))?;
    let (train_docs, test_docs) = corpus.documents.split_at(synth.documents - test_n);
    let mut written = Vec::new();
    for (name, docs) in [("train.jsonl", train_docs), ("test.jsonl", test_docs)] {
        let p = dir.join(name);
        input(&p, save_corpus(&p, docs))?;
        written.push(p);
    }
    let p = dir.join("embeddings.txt");
    let mut w = create(&p)?;
    input(&p, corpus.embeddings.write(&mut w))?;
    io(&p, w.flush())?;
    written.push(p);
    Ok(written)
}
