use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::ScorerKind;
use crate::types::{PosFilter, RelationLabel};

/// Model variants: which encoder layout, which relation candidates in stage 1,
/// and whether stage 2 runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Separate encoders, relations trained on gold-event pairs only.
    Single,
    /// Shared encoder, relations trained on gold-event pairs only.
    Multi,
    /// Shared encoder, gold-event pairs then predicted-event pairs.
    Pipeline,
    /// `Pipeline` followed by SSVM fine-tuning.
    Structured,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::Multi => "multi",
            Mode::Pipeline => "pipeline",
            Mode::Structured => "structured",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Mode::Single),
            "multi" => Ok(Mode::Multi),
            "pipeline" => Ok(Mode::Pipeline),
            "structured" => Ok(Mode::Structured),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected single, multi, pipeline or structured)"
            ))),
        }
    }
}

/// Hyper-parameters for both training stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// SSVM loss weight.
    pub c: f64,
    /// Weight of event scores, in inference and in the hinge alike.
    pub c_event: f64,
    /// Cross-entropy weight per relation label; missing labels weigh 1.
    pub class_weights: BTreeMap<RelationLabel, f64>,
    /// Cross-entropy weight of event terms (relation terms weigh 1).
    pub event_weight: f64,
    /// Tokens whose event probability falls below this are fixed `NON_EVENT`.
    pub t_event: f64,
    /// Stage-1 epochs that build relation candidates from gold events.
    pub gold_epochs: usize,
    /// Stage-1 epochs.
    pub total_epochs: usize,
    pub learning_rate: f64,
    pub decay: f64,
    pub momentum: f64,
    pub l2: f64,
    pub seed: u64,

    pub ssvm_epochs: usize,
    pub ssvm_learning_rate: f64,
    pub ssvm_decay: f64,
    pub ssvm_momentum: f64,

    pub scorer: ScorerKind,
    pub hidden: usize,
    pub window: usize,
    /// Dimension of the trainable lookup; ignored with precomputed vectors.
    pub embedding_dim: usize,
    pub shared_encoder: bool,
    /// POS tags admitted as event candidates; empty admits every token.
    pub pos_whitelist: Vec<String>,
    /// Reserved; has no effect.
    pub dropout: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            c: 1.0,
            c_event: 0.5,
            class_weights: BTreeMap::new(),
            event_weight: 1.0,
            t_event: 0.3,
            gold_epochs: 3,
            total_epochs: 10,
            learning_rate: 0.005,
            decay: 0.1,
            momentum: 0.5,
            l2: 1e-5,
            seed: 0,
            ssvm_epochs: 3,
            ssvm_learning_rate: 0.001,
            ssvm_decay: 0.1,
            ssvm_momentum: 0.5,
            scorer: ScorerKind::Mlp,
            hidden: 32,
            window: 1,
            embedding_dim: 16,
            shared_encoder: true,
            pos_whitelist: Vec::new(),
            dropout: 0.0,
        }
    }
}

impl TrainConfig {
    /// Structured-model settings for TB-Dense.
    pub fn tbdense() -> Self {
        TrainConfig {
            ssvm_learning_rate: 0.0005,
            ssvm_decay: 0.1,
            ssvm_momentum: 0.2,
            c_event: 0.1,
            t_event: 0.49,
            event_weight: 6.0,
            hidden: 90,
            dropout: 0.6,
            ..TrainConfig::default()
        }
    }

    /// Structured-model settings for MATRES.
    pub fn matres() -> Self {
        TrainConfig {
            ssvm_learning_rate: 0.001,
            ssvm_decay: 0.1,
            ssvm_momentum: 0.1,
            c_event: 5.0,
            t_event: 0.4,
            event_weight: 15.0,
            hidden: 90,
            dropout: 0.4,
            ..TrainConfig::default()
        }
    }

    pub fn profile(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(TrainConfig::default()),
            "tbdense" => Ok(TrainConfig::tbdense()),
            "matres" => Ok(TrainConfig::matres()),
            other => Err(Error::Config(format!(
                "unknown profile `{other}` (expected default, tbdense or matres)"
            ))),
        }
    }

    /// Adjusts encoder sharing and candidate switching for `mode`.
    pub fn with_mode(mut self, mode: Mode) -> Self {
        match mode {
            Mode::Single => {
                self.shared_encoder = false;
                self.gold_epochs = self.total_epochs;
            }
            Mode::Multi => {
                self.shared_encoder = true;
                self.gold_epochs = self.total_epochs;
            }
            Mode::Pipeline | Mode::Structured => self.shared_encoder = true,
        }
        self
    }

    pub fn class_weight(&self, label: RelationLabel) -> f64 {
        self.class_weights.get(&label).copied().unwrap_or(1.0)
    }

    pub fn pos_filter(&self) -> PosFilter {
        if self.pos_whitelist.is_empty() {
            PosFilter::All
        } else {
            PosFilter::only(self.pos_whitelist.iter().cloned())
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("c", self.c),
            ("c_event", self.c_event),
            ("event_weight", self.event_weight),
            ("learning_rate", self.learning_rate),
            ("ssvm_learning_rate", self.ssvm_learning_rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (label, w) in &self.class_weights {
            if !(*w > 0.0 && w.is_finite()) {
                return Err(Error::Config(format!(
                    "class weight of {label} must be positive"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.t_event) {
            return Err(Error::Config(format!(
                "t_event must be in [0, 1], got {}",
                self.t_event
            )));
        }
        for (name, v) in [
            ("decay", self.decay),
            ("ssvm_decay", self.ssvm_decay),
            ("momentum", self.momentum),
            ("ssvm_momentum", self.ssvm_momentum),
            ("dropout", self.dropout),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must be in [0, 1), got {v}")));
            }
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::Config("l2 must be nonnegative".into()));
        }
        if self.gold_epochs > self.total_epochs {
            return Err(Error::Config("gold_epochs exceeds total_epochs".into()));
        }
        if self.scorer == ScorerKind::Mlp && self.hidden == 0 {
            return Err(Error::Config("an mlp scorer needs hidden > 0".into()));
        }
        if self.embedding_dim == 0 {
            return Err(Error::Config("embedding_dim must be positive".into()));
        }
        Ok(())
    }
}
