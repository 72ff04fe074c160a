//! Conditional adversarial training over labeled signals: noise
//! conditioning, the five model variants, losses, the two-phase training
//! loop, and checkpointing.

pub mod checkpoint;
pub mod loss;
pub mod model;
pub mod noise;
pub mod train;

pub use checkpoint::{model_from_bytes, model_to_bytes, read_checkpoint, write_checkpoint};
pub use model::{
    stack_with_label, DiscOutput, Discriminator, GLossForm, GanHyperParams, GanModel, Generator,
    NetArch, Variant,
};
pub use noise::{conditioned_noise, sample_sinusoidal_noise, NoiseSpec};
pub use train::{generate_labeled, train, train_epoch, EpochStats, TrainLog};
