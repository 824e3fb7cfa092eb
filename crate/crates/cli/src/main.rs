use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tempjoint::data::write_predictions;
use tempjoint_cli::{
    cmd_evaluate, cmd_predict, cmd_solve, cmd_stats, cmd_synth, cmd_train, format_train_log,
    CliError, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "tempjoint",
    version,
    about = "Joint event and temporal relation extraction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    /// `key = value` configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extra `key=value` settings, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_parser = ["single", "multi", "pipeline", "structured"])]
    mode: Option<String>,
    #[arg(long, global = true, value_parser = ["exclude-none", "exclude-none-vague"])]
    metric: Option<String>,
    /// Worker threads for prediction.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Named hyper-parameter profile: default, tbdense or matres.
    #[arg(long, global = true)]
    profile: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model and write a checkpoint plus a per-epoch log.
    Train {
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Predict joint assignments for a corpus.
    Predict {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Output file; standard output when absent.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Score predictions against a gold corpus.
    Evaluate {
        #[arg(long)]
        gold: Option<PathBuf>,
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Also write the report as JSON.
        #[arg(long)]
        report_json: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Solve one score file exactly and print the assignment.
    Solve {
        scores: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        c_event: f64,
    },
    /// Corpus statistics per file.
    Stats {
        #[arg(required = true)]
        corpora: Vec<PathBuf>,
    },
    /// Generate a synthetic corpus with embeddings.
    Synth {
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        documents: Option<usize>,
        #[arg(long)]
        test_documents: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

fn settings(common: &Common, paths: &[(&str, &Option<PathBuf>)]) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::new(),
    };
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    let flags = [
        ("seed", common.seed.map(|s| s.to_string())),
        ("mode", common.mode.clone()),
        ("metric", common.metric.clone()),
        ("jobs", common.jobs.map(|j| j.to_string())),
        ("profile", common.profile.clone()),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    for (k, v) in paths {
        if let Some(p) = v {
            cfg.set(k, p.display().to_string())?;
        }
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train {
            train,
            embeddings,
            checkpoint,
            common,
        } => {
            let cfg = settings(
                &common,
                &[
                    ("train", &train),
                    ("embeddings", &embeddings),
                    ("checkpoint", &checkpoint),
                ],
            )?;
            let outcome = cmd_train(&cfg)?;
            print!("{}", format_train_log(&outcome.log));
        }
        Command::Predict {
            checkpoint,
            corpus,
            embeddings,
            predictions,
            common,
        } => {
            let cfg = settings(
                &common,
                &[
                    ("checkpoint", &checkpoint),
                    ("corpus", &corpus),
                    ("embeddings", &embeddings),
                    ("predictions", &predictions),
                ],
            )?;
            let out = cmd_predict(&cfg)?;
            if cfg.get("predictions").is_none() {
                write_predictions(std::io::stdout().lock(), &out)?;
            }
        }
        Command::Evaluate {
            gold,
            predictions,
            report_json,
            common,
        } => {
            let cfg = settings(
                &common,
                &[
                    ("gold", &gold),
                    ("predictions", &predictions),
                    ("report_json", &report_json),
                ],
            )?;
            print!("{}", cmd_evaluate(&cfg)?);
        }
        Command::Solve { scores, c_event } => print!("{}", cmd_solve(&scores, c_event)?),
        Command::Stats { corpora } => print!("{}", cmd_stats(&corpora)?),
        Command::Synth {
            out_dir,
            documents,
            test_documents,
            common,
        } => {
            let mut cfg = settings(&common, &[("out_dir", &out_dir)])?;
            if let Some(n) = documents {
                cfg.set("synth.documents", n.to_string())?;
            }
            if let Some(n) = test_documents {
                cfg.set("synth.test_documents", n.to_string())?;
            }
            for p in cmd_synth(&cfg)? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
