use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Rdf2VecError, WalkCorpus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Starting learning rate, decayed linearly to 1e-4 of itself.
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        Self { dim: 500, window: 5, negatives: 5, epochs: 5, learning_rate: 0.025, seed: 42 }
    }
}

#[derive(Debug, Clone)]
pub struct SkipGramOutcome {
    /// Input vectors, one row per node index.
    pub vectors: Array2<f64>,
    /// Mean negative-sampling loss per training pair, per epoch.
    pub epoch_loss: Vec<f64>,
}

/// Unigram^0.75 sampler over node indices.
struct NoiseDistribution {
    cdf: Vec<f64>,
}

impl NoiseDistribution {
    fn new(counts: &[usize]) -> Self {
        let mut acc = 0.0;
        let cdf = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(0.75);
                acc
            })
            .collect();
        Self { cdf }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().unwrap();
        let x = rng.gen_range(0.0..total);
        self.cdf.partition_point(|&c| c <= x).min(self.cdf.len() - 1)
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 { -(-x).exp().ln_1p() } else { x - x.exp().ln_1p() }
}

/// Skip-gram with negative sampling over walk sequences.
///
/// For every position a reduced window `b` is drawn from `1..=window`, and
/// each context within `b` of the center is one positive pair trained
/// against `negatives` noise nodes. Updates are sequential, so results are
/// reproducible for a fixed seed.
pub fn train_skip_gram(
    corpus: &WalkCorpus,
    node_count: usize,
    cfg: &SkipGramConfig,
) -> Result<SkipGramOutcome, Rdf2VecError> {
    if corpus.is_empty() || corpus.token_count() == 0 {
        return Err(Rdf2VecError::EmptyCorpus);
    }
    if cfg.dim == 0 || cfg.window == 0 || cfg.epochs == 0 {
        return Err(Rdf2VecError::InvalidConfig("dim, window and epochs must be >= 1".into()));
    }
    let mut counts = vec![0usize; node_count];
    for &t in corpus.walks.iter().flatten() {
        if t >= node_count {
            return Err(Rdf2VecError::InvalidConfig(format!("walk node {t} out of range")));
        }
        counts[t] += 1;
    }
    let noise = NoiseDistribution::new(&counts);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dim = cfg.dim;
    let half = 0.5 / dim as f64;
    let mut input = Array2::from_shape_simple_fn((node_count, dim), || rng.gen_range(-half..half));
    let mut output = Array2::<f64>::zeros((node_count, dim));

    let total = (cfg.epochs * corpus.token_count()) as f64;
    let mut processed = 0usize;
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut grad = vec![0.0; dim];
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let (mut loss, mut pairs) = (0.0, 0usize);
        for &w in &order {
            let walk = &corpus.walks[w];
            for (pos, &center) in walk.iter().enumerate() {
                let lr = cfg.learning_rate * (1.0 - processed as f64 / total).max(1e-4);
                processed += 1;
                let b = rng.gen_range(1..=cfg.window);
                let lo = pos.saturating_sub(b);
                let hi = (pos + b).min(walk.len() - 1);
                for ctx_pos in lo..=hi {
                    if ctx_pos == pos {
                        continue;
                    }
                    let context = walk[ctx_pos];
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for k in 0..=cfg.negatives {
                        let (target, label) = if k == 0 {
                            (context, 1.0)
                        } else {
                            let t = noise.sample(&mut rng);
                            if t == context {
                                continue;
                            }
                            (t, 0.0)
                        };
                        let x = input.row(center).dot(&output.row(target));
                        loss -= if label > 0.5 { log_sigmoid(x) } else { log_sigmoid(-x) };
                        let g = (label - sigmoid(x)) * lr;
                        let out_row = output.row(target);
                        for (acc, &o) in grad.iter_mut().zip(out_row.iter()) {
                            *acc += g * o;
                        }
                        let in_row = input.row(center).to_owned();
                        output.row_mut(target).scaled_add(g, &in_row);
                    }
                    for (v, g) in input.row_mut(center).iter_mut().zip(&grad) {
                        *v += g;
                    }
                    pairs += 1;
                }
            }
        }
        if input.iter().chain(output.iter()).any(|v| !v.is_finite()) {
            return Err(Rdf2VecError::NonFinite(epoch + 1));
        }
        epoch_loss.push(if pairs == 0 { 0.0 } else { loss / pairs as f64 });
    }
    Ok(SkipGramOutcome { vectors: input, epoch_loss })
}
