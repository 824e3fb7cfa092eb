//! Two-stage training and prediction.
//!
//! Stage 1 fits the event and relation scorers with weighted cross-entropy,
//! first on pairs of gold events and then on pairs of predicted events. Stage 2
//! fine-tunes the same parameters with the structural hinge, using exact
//! loss-augmented inference to find the most violating assignment.

mod config;
mod model;
mod optim;
mod predict;
mod train;

pub use config::{Mode, TrainConfig};
pub use model::{Model, CHECKPOINT_VERSION};
pub use optim::Sgd;
pub use predict::{predict, predict_with, Decoding};
pub use train::{
    cross_entropy_gradient, cross_entropy_loss, event_probability, filtered_candidates, hinge,
    hinge_gradient, relation_examples, ssvm_instance_loss, train, train_stage1, train_stage2,
    Hinge, TrainLog,
};
