use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use crate::error::{Error, Result};
use crate::scoring::{
    Embeddings, Encoder, FeatureConfig, JointScorer, PrecomputedEmbeddings, Scorer,
};
use crate::types::{Document, PosFilter};

/// Checkpoint format version written by [`Model::save`].
pub const CHECKPOINT_VERSION: u32 = 1;

/// Trained scorers plus everything needed to rebuild features at prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub scorer: JointScorer,
    pub config: TrainConfig,
}

impl Model {
    /// Fresh model whose vocabularies come from `docs`. With `embeddings` the
    /// encoder is frozen; otherwise a trainable lookup of
    /// `config.embedding_dim` is built over the words of `docs`.
    pub fn new(
        config: &TrainConfig,
        docs: &[Document],
        embeddings: Option<Arc<PrecomputedEmbeddings>>,
    ) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let emb = match embeddings {
            Some(p) => Embeddings::Precomputed(p),
            None => Embeddings::lookup(docs, config.embedding_dim, &mut rng),
        };
        let features = FeatureConfig::from_documents(docs, config.window);
        let scorer = JointScorer::new(
            features,
            config.scorer,
            config.hidden,
            emb,
            config.shared_encoder,
            &mut rng,
        );
        Ok(Model {
            scorer,
            config: config.clone(),
        })
    }

    pub fn pos_filter(&self) -> PosFilter {
        self.config.pos_filter()
    }

    /// Writes a JSON checkpoint. Maps are ordered, so equal models give equal
    /// bytes.
    pub fn save(&self, w: impl Write) -> Result<()> {
        let encoder_tables = |e: &Embeddings| match e {
            Embeddings::Lookup { dim, vocab, table } => EncoderFile::Lookup {
                dim: *dim,
                vocab: vocab.clone(),
                table: table.clone(),
            },
            Embeddings::Precomputed(p) => EncoderFile::Precomputed { dim: p.dim },
        };
        let encoders = match &self.scorer.encoder {
            Encoder::Shared(e) => vec![encoder_tables(e)],
            Encoder::Separate { event, relation } => {
                vec![encoder_tables(event), encoder_tables(relation)]
            }
        };
        let file = CheckpointFile {
            version: CHECKPOINT_VERSION,
            config: self.config.clone(),
            features: self.scorer.features.clone(),
            event: self.scorer.event.clone(),
            relation: self.scorer.relation.clone(),
            encoders,
        };
        let mut w = w;
        serde_json::to_writer_pretty(&mut w, &file)
            .map_err(|e| Error::Config(format!("cannot serialize checkpoint: {e}")))?;
        w.write_all(b"\n")?;
        Ok(())
    }

    /// Reads a checkpoint written by [`Model::save`]. Frozen encoders are
    /// re-attached to `embeddings`, which must then be given and have the
    /// recorded dimension.
    pub fn load(r: impl Read, embeddings: Option<Arc<PrecomputedEmbeddings>>) -> Result<Self> {
        let file: CheckpointFile = serde_json::from_reader(r)
            .map_err(|e| Error::parse(e.line(), format!("bad checkpoint: {e}")))?;
        if file.version != CHECKPOINT_VERSION {
            return Err(Error::Config(format!(
                "checkpoint version {} is not supported (expected {CHECKPOINT_VERSION})",
                file.version
            )));
        }
        let attach = |e: EncoderFile| -> Result<Embeddings> {
            match e {
                EncoderFile::Lookup { dim, vocab, table } => {
                    if table.len() != (vocab.len() + 1) * dim {
                        return Err(Error::contract(
                            "lookup table size disagrees with its vocabulary",
                        ));
                    }
                    Ok(Embeddings::Lookup { dim, vocab, table })
                }
                EncoderFile::Precomputed { dim } => {
                    let p = embeddings.clone().ok_or_else(|| {
                        Error::Config("checkpoint needs precomputed embeddings".into())
                    })?;
                    if p.dim != dim {
                        return Err(Error::contract(format!(
                            "checkpoint expects {dim}-dimensional embeddings, got {}",
                            p.dim
                        )));
                    }
                    Ok(Embeddings::Precomputed(p))
                }
            }
        };
        let mut encoders = file.encoders.into_iter();
        let encoder = match (encoders.next(), encoders.next(), encoders.next()) {
            (Some(e), None, None) => Encoder::Shared(attach(e)?),
            (Some(a), Some(b), None) => Encoder::Separate {
                event: attach(a)?,
                relation: attach(b)?,
            },
            _ => return Err(Error::contract("checkpoint must hold one or two encoders")),
        };
        let d = encoder.event().dim();
        if file.event.inputs != file.features.event_dim(d)
            || file.relation.inputs != file.features.relation_dim(d)
            || file.event.params.len() != file.event.param_count()
            || file.relation.params.len() != file.relation.param_count()
            || file.event.outputs != 2
            || file.relation.outputs != 7
        {
            return Err(Error::contract(
                "scorer dimensions disagree with the feature layout",
            ));
        }
        Ok(Model {
            scorer: JointScorer {
                features: file.features,
                event: file.event,
                relation: file.relation,
                encoder,
            },
            config: file.config,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    version: u32,
    config: TrainConfig,
    features: FeatureConfig,
    event: Scorer,
    relation: Scorer,
    encoders: Vec<EncoderFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum EncoderFile {
    Lookup {
        dim: usize,
        vocab: BTreeMap<String, usize>,
        table: Vec<f64>,
    },
    Precomputed {
        dim: usize,
    },
}
