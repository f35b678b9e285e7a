//! Multi-head graph attention network for essay-node classification.
//!
//! A dense projection maps each node's binary features to `dense_units`
//! (ELU). A stack of attention layers follows; in each, every head scores
//! neighbor pairs with `LeakyReLU(a . [W h_i || W h_j])`, normalizes the
//! scores with a softmax over the node's neighborhood (self-loop included)
//! and sums the transformed neighbor features with those weights. Head
//! outputs are averaged and passed through ELU. The classifier reads the
//! concatenation of every layer's output at an essay node (plus its graph
//! embedding in enriched mode) and applies a two-class softmax.

mod adam;
mod checkpoint;
mod graph;
mod model;
mod ops;
mod train;

pub use adam::{adam_step, adam_update, AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use graph::AttentionGraph;
pub use model::{
    cross_entropy, multi_head_layer, predicted_class, GatLayerParams, GatModel, GatParams,
    GraphInputs, ModelShape, CLASSES,
};
pub use ops::{
    aggregate_head, elu, leaky_relu, normalize_scores, raw_attention_score, Activation,
    AttentionHeadParams, LEAKY_SLOPE,
};
pub use train::{history_csv, predict_trait, train_trait, EpochRecord, TrainConfig, TrainOutcome};

#[derive(Debug, thiserror::Error)]
pub enum GatError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("model expects node embeddings but none were supplied")]
    MissingEmbedding,
    #[error("loss became non-finite (training diverged)")]
    NonFiniteLoss,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// Attention coefficients of every head of `layer` for each edge slot of
/// `graph`, grouped per head. Exposed for inspection and testing.
pub fn attention_coefficients(
    graph: &AttentionGraph,
    h: &ndarray::Array2<f64>,
    layer: &GatLayerParams,
) -> Result<Vec<Vec<f64>>, GatError> {
    let (_, trace) = model::layer_forward(graph, h, layer, Activation::Elu)?;
    Ok(trace.alpha().to_vec())
}
