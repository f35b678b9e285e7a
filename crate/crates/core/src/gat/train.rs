use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::model::{cross_entropy, predicted_class, GatModel, GraphInputs, ModelShape};
use super::GatError;

/// Training hyperparameters. Defaults are the reference settings: 50
/// epochs, batch 32, learning rate 3e-4, patience 10, 8 heads, 128 hidden
/// units, 5 attention layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub patience: usize,
    pub validation_split: f64,
    pub heads: usize,
    pub hidden_units: usize,
    pub dense_units: usize,
    pub layers: usize,
    pub seed: u64,
    pub enriched: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 32,
            learning_rate: 3e-4,
            patience: 10,
            validation_split: 0.1,
            heads: 8,
            hidden_units: 128,
            dense_units: 128,
            layers: 5,
            seed: 42,
            enriched: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), GatError> {
        let counts = [
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("patience", self.patience),
            ("heads", self.heads),
            ("hidden_units", self.hidden_units),
            ("dense_units", self.dense_units),
            ("layers", self.layers),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(GatError::InvalidConfig(format!("{name} must be positive")));
        }
        if !(self.validation_split > 0.0 && self.validation_split < 1.0) {
            return Err(GatError::InvalidConfig("validation_split must lie in (0, 1)".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(GatError::InvalidConfig("learning_rate must be positive".into()));
        }
        Ok(())
    }

    pub fn shape(&self, features: usize, embedding_dim: usize) -> ModelShape {
        ModelShape {
            features,
            dense_units: self.dense_units,
            hidden_units: self.hidden_units,
            heads: self.heads,
            layers: self.layers,
            embedding_dim: if self.enriched { embedding_dim } else { 0 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

/// `epoch,train_loss,val_loss,val_accuracy` with one row per epoch.
pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,train_loss,val_loss,val_accuracy\n");
    for r in history {
        writeln!(out, "{},{},{},{}", r.epoch, r.train_loss, r.val_loss, r.val_accuracy).unwrap();
    }
    out
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the best validation epoch.
    pub model: GatModel,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
}

/// Trains one binary classifier on labelled essay nodes.
///
/// `train` pairs global node indices with their labels. A seeded fraction
/// (`validation_split`, at least one node) is held out for early stopping;
/// the rest is visited in shuffled mini-batches, each a full-graph forward
/// pass with the loss restricted to the batch. An epoch counts as an
/// improvement when validation accuracy rises, or stays equal while
/// validation loss falls. Training stops after `patience` epochs without
/// improvement and returns the best snapshot.
pub fn train_trait(
    inputs: &GraphInputs,
    train: &[(usize, u8)],
    config: &TrainConfig,
) -> Result<TrainOutcome, GatError> {
    config.validate()?;
    if train.len() < 2 {
        return Err(GatError::InvalidConfig("at least two labelled essays are needed".into()));
    }
    let embedding_dim = match (config.enriched, inputs.embeddings) {
        (true, None) => return Err(GatError::MissingEmbedding),
        (true, Some(e)) => e.dim(),
        (false, _) => 0,
    };
    let inputs = GraphInputs { embeddings: if config.enriched { inputs.embeddings } else { None }, ..*inputs };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut pool = train.to_vec();
    pool.shuffle(&mut rng);
    let n_val = ((pool.len() as f64 * config.validation_split).ceil() as usize).clamp(1, pool.len() - 1);
    let val = pool.split_off(pool.len() - n_val);
    let mut fit = pool;
    let (val_nodes, val_targets): (Vec<usize>, Vec<u8>) = val.iter().copied().unzip();

    let shape = config.shape(inputs.features.cols(), embedding_dim);
    shape.validate()?;
    let mut model = GatModel::init(shape, &mut rng);
    let adam = AdamConfig::new(config.learning_rate);
    let mut state = AdamState::new(&model.params);

    let mut history = Vec::new();
    let mut best = (model.params.clone(), f64::NEG_INFINITY, f64::INFINITY, 0usize);
    let mut stale = 0;
    for epoch in 1..=config.epochs {
        fit.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in fit.chunks(config.batch_size) {
            let (nodes, targets): (Vec<usize>, Vec<u8>) = batch.iter().copied().unzip();
            let (loss, grads) = model.loss_and_gradients(&inputs, &nodes, &targets)?;
            adam_step(&mut model.params, &grads, &mut state, &adam);
            if !model.params.all_finite() {
                return Err(GatError::NonFiniteLoss);
            }
            loss_sum += loss * batch.len() as f64;
        }
        let probs = model.probabilities(&inputs, &val_nodes)?;
        let val_loss = probs.iter().zip(&val_targets).map(|(p, &y)| cross_entropy(*p, y)).sum::<f64>()
            / val_nodes.len() as f64;
        let correct = probs.iter().zip(&val_targets).filter(|(p, &y)| predicted_class(**p) == y).count();
        let val_accuracy = correct as f64 / val_nodes.len() as f64;
        if !val_loss.is_finite() {
            return Err(GatError::NonFiniteLoss);
        }
        history.push(EpochRecord {
            epoch,
            train_loss: loss_sum / fit.len() as f64,
            val_loss,
            val_accuracy,
        });
        let improved = val_accuracy > best.1 || (val_accuracy == best.1 && val_loss < best.2);
        if improved {
            best = (model.params.clone(), val_accuracy, val_loss, epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                log::debug!("early stop at epoch {epoch}, best epoch {}", best.3);
                break;
            }
        }
    }
    model.params = best.0;
    Ok(TrainOutcome { model, history, best_epoch: best.3 })
}

/// Binary predictions for essay nodes.
pub fn predict_trait(model: &GatModel, inputs: &GraphInputs, nodes: &[usize]) -> Result<Vec<u8>, GatError> {
    model.predict(inputs, nodes)
}
