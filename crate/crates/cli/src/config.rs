//! `key = value` run configuration files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use tempjoint::data::SynthConfig;
use tempjoint::eval::MetricProfile;
use tempjoint::learning::{Mode, TrainConfig};
use tempjoint::scoring::ScorerKind;
use tempjoint::RelationLabel;

use crate::CliError;

/// Keys accepted besides `class_weight.<LABEL>`.
pub const KNOWN_KEYS: &[&str] = &[
    // run
    "profile",
    "mode",
    "metric",
    "jobs",
    "seed",
    "train",
    "test",
    "corpus",
    "embeddings",
    "checkpoint",
    "predictions",
    "gold",
    "out",
    "out_dir",
    "report_json",
    // training
    "c",
    "c_event",
    "event_weight",
    "t_event",
    "gold_epochs",
    "total_epochs",
    "learning_rate",
    "decay",
    "momentum",
    "l2",
    "ssvm_epochs",
    "ssvm_learning_rate",
    "ssvm_decay",
    "ssvm_momentum",
    "scorer",
    "hidden",
    "window",
    "embedding_dim",
    "shared_encoder",
    "pos_whitelist",
    "dropout",
    // synthetic corpora
    "synth.documents",
    "synth.test_documents",
    "synth.sentences",
    "synth.tokens_per_sentence",
    "synth.event_rate",
    "synth.vague_rate",
    "synth.noise",
    "synth.embedding_dim",
];

fn is_known(key: &str) -> bool {
    if let Some(label) = key.strip_prefix("class_weight.") {
        return RelationLabel::from_str(label).is_ok();
    }
    KNOWN_KEYS.contains(&key)
}

/// Flat settings; later assignments (and command-line flags) win.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected `key = value`", n + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), CliError> {
        if !is_known(key) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_owned(), value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Config(format!("`{key} = {v}`: {e}")))
            })
            .transpose()
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }

    pub fn require_path(&self, key: &str) -> Result<PathBuf, CliError> {
        self.path(key).ok_or_else(|| {
            CliError::Config(format!(
                "missing `{key}` (flag --{})",
                key.replace('_', "-")
            ))
        })
    }

    pub fn mode(&self) -> Result<Mode, CliError> {
        Ok(self.parsed("mode")?.unwrap_or(Mode::Structured))
    }

    pub fn metric(&self) -> Result<MetricProfile, CliError> {
        Ok(self.parsed("metric")?.unwrap_or(MetricProfile::ExcludeNone))
    }

    pub fn jobs(&self) -> Result<usize, CliError> {
        Ok(self.parsed("jobs")?.unwrap_or(1))
    }

    /// The named profile (default `default`) with every training key applied.
    pub fn train_config(&self) -> Result<TrainConfig, CliError> {
        let mut c = TrainConfig::profile(self.get("profile").unwrap_or("default"))?;
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.parsed(stringify!($field))? { c.$field = v; })*
            };
        }
        apply!(
            c,
            c_event,
            event_weight,
            t_event,
            gold_epochs,
            total_epochs,
            learning_rate,
            decay,
            momentum,
            l2,
            seed,
            ssvm_epochs,
            ssvm_learning_rate,
            ssvm_decay,
            ssvm_momentum,
            hidden,
            window,
            embedding_dim,
            shared_encoder,
            dropout
        );
        if let Some(v) = self.get("scorer") {
            c.scorer = match v {
                "linear" => ScorerKind::Linear,
                "mlp" => ScorerKind::Mlp,
                other => {
                    return Err(CliError::Config(format!(
                        "`scorer = {other}`: expected linear or mlp"
                    )))
                }
            };
        }
        if let Some(v) = self.get("pos_whitelist") {
            c.pos_whitelist = v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
        }
        for (k, v) in &self.values {
            if let Some(label) = k.strip_prefix("class_weight.") {
                let label = RelationLabel::from_str(label)?;
                let w = v
                    .parse::<f64>()
                    .map_err(|e| CliError::Config(format!("`{k} = {v}`: {e}")))?;
                c.class_weights.insert(label, w);
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn synth_config(&self) -> Result<SynthConfig, CliError> {
        let mut c = SynthConfig::default();
        if let Some(v) = self.parsed("seed")? {
            c.seed = v;
        }
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.parsed(concat!("synth.", stringify!($field)))? { c.$field = v; })*
            };
        }
        apply!(
            documents,
            sentences,
            tokens_per_sentence,
            event_rate,
            vague_rate,
            noise,
            embedding_dim
        );
        c.validate()?;
        Ok(c)
    }

    pub fn test_documents(&self) -> Result<usize, CliError> {
        Ok(self.parsed("synth.test_documents")?.unwrap_or(0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let mut c = RunConfig::parse(
            "# profile\nprofile = tbdense\nc_event = 0.2  # tweak\n\nclass_weight.IS_INCLUDED = 4\n",
        )
        .unwrap();
        c.set("seed", "9").unwrap();
        let t = c.train_config().unwrap();
        assert_eq!(t.c_event, 0.2);
        assert_eq!(t.t_event, 0.49);
        assert_eq!(t.seed, 9);
        assert_eq!(t.class_weight(RelationLabel::IsIncluded), 4.0);
    }

    #[test]
    fn unknown_keys_rejected_with_line() {
        let e = RunConfig::parse("seed = 1\nlearning_rat = 0.1\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(e.to_string().contains("learning_rat"));
        assert!(RunConfig::parse("class_weight.LATER = 2").is_err());
        assert!(RunConfig::parse("no equals sign").is_err());
    }

    #[test]
    fn bad_values_reported() {
        let c = RunConfig::parse("t_event = high").unwrap();
        assert!(c.train_config().is_err());
        let c = RunConfig::parse("t_event = 1.5").unwrap();
        assert!(c.train_config().is_err());
        let c = RunConfig::parse("mode = joint").unwrap();
        assert!(c.mode().is_err());
    }

    #[test]
    fn synth_keys() {
        let c = RunConfig::parse("seed = 3\nsynth.documents = 7\nsynth.vague_rate = 0.2").unwrap();
        let s = c.synth_config().unwrap();
        assert_eq!((s.seed, s.documents, s.vague_rate), (3, 7, 0.2));
    }
}
