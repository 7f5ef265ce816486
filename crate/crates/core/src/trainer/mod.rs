//! Embedding matrix, optimisers and the batched training loop.

mod adam;
mod embedding;
mod sampler;
mod train;
mod updates;

pub use adam::{adam_step, AdamState};
pub use embedding::{constriction, init_embeddings, EmbeddingMatrix};
pub use sampler::{degree_power_weights, NegativeSampler};
pub use train::{
    substream, subseed, train, train_from, EpochRecord, Optimizer, Repulsion, Stream, TrainConfig, TrainingTrace,
    WeightVectorMode,
};
pub use updates::{
    dimreg_update, positive_gradient, positive_update, sgns_gradient, sgns_update, GradBuffer, RegularizerWeights,
    SgnsWeight,
};
