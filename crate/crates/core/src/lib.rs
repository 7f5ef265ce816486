//! Skip-gram graph embeddings with negative sampling, attraction-only
//! training or dimension-mean regularisation, plus numerical checks of the
//! collapse and regularisation results and link-prediction evaluation.

pub mod checks;
pub mod error;
pub mod graph;
pub mod linkpred;
pub mod math;
pub mod objective;
pub mod pipeline;
pub mod theory;
pub mod trainer;
pub mod walks;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, NodeId};
pub use trainer::{EmbeddingMatrix, TrainConfig};
pub use walks::{PairSet, WalkConfig};
