//! Minibatch training: one epoch over a seeded shuffle.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{adam_step, gradients_over, AdamState, FmParams};
use crate::sparse::Dataset;

/// Optimization settings. Defaults follow the common CTR recipe:
/// 30 epochs, batch 2048, learning rate 1e-3, 64-dimensional
/// embeddings, no weight decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Zero is allowed and makes training a no-op, which is useful for
    /// measuring loss under frozen parameters.
    pub learning_rate: f64,
    pub embed_dim: usize,
    pub seed: u64,
    /// Optional L2 penalty on `w` and `V` (never the bias), folded into
    /// the gradient. Zero by default so augmentation comparisons are
    /// not confounded by explicit regularization.
    pub weight_decay: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 2048,
            learning_rate: 1e-3,
            embed_dim: 64,
            seed: 42,
            weight_decay: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::validation("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::validation("batch size must be at least 1"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::validation(format!(
                "learning rate {} must be finite and >= 0",
                self.learning_rate
            )));
        }
        if self.embed_dim == 0 {
            return Err(Error::validation("embedding size must be at least 1"));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::validation(format!(
                "weight decay {} must be finite and >= 0",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

/// What one epoch reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// Mean training loss over all examples, measured before each
    /// batch's update.
    pub mean_loss: f64,
    pub batches: usize,
}

/// Runs one pass over `data` in shuffled minibatches, updating `params`
/// and `state` in place.
///
/// The shuffle comes entirely from `rng`, so identical seeds and inputs
/// reproduce the epoch bit for bit. The reported loss is measured on
/// each batch before its update.
pub fn train_epoch<R: Rng>(
    params: &mut FmParams,
    state: &mut AdamState,
    data: &Dataset,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<EpochStats> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::validation("cannot train on an empty dataset"));
    }
    if data.dim() != params.dim() {
        return Err(Error::DimMismatch {
            expected: params.dim(),
            got: data.dim(),
        });
    }
    let n = data.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut total_loss = 0.0;
    let mut batches = 0;
    for chunk in order.chunks(cfg.batch_size) {
        let (mut grads, loss) = gradients_over(params, ExampleIter {
            data,
            idxs: chunk.iter(),
        })?;
        if cfg.weight_decay > 0.0 {
            for (g, p) in grads.w.iter_mut().zip(params.w()) {
                *g += cfg.weight_decay * p;
            }
            for (g, p) in grads.v.iter_mut().zip(params.v()) {
                *g += cfg.weight_decay * p;
            }
        }
        adam_step(state, params, &grads)?;
        total_loss += loss * chunk.len() as f64;
        batches += 1;
    }
    Ok(EpochStats {
        mean_loss: total_loss / n as f64,
        batches,
    })
}

struct ExampleIter<'a> {
    data: &'a Dataset,
    idxs: std::slice::Iter<'a, usize>,
}

impl<'a> Iterator for ExampleIter<'a> {
    type Item = &'a crate::sparse::LabeledExample;

    fn next(&mut self) -> Option<Self::Item> {
        self.idxs.next().map(|&i| self.data.get(i))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.idxs.size_hint()
    }
}

impl ExactSizeIterator for ExampleIter<'_> {}
