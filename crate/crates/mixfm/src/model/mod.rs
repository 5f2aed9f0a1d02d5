//! Second-order factorization machine: parameters, prediction through
//! the linear-time reformulation, logistic loss, and analytic gradients.

mod adam;
mod checkpoint;
mod train;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use train::{train_epoch, EpochStats, TrainConfig};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::sparse::SparseVector;

/// Standard deviation of the Gaussian embedding initialization.
pub const INIT_SIGMA: f64 = 0.01;

/// Model parameters: bias `w0`, linear weights `w` (length `m`), and
/// per-feature embeddings `v` stored row-major as `m x d`.
///
/// The score of an input is
/// `w0 + sum_i w_i x_i + sum_{i<j} <v_i, v_j> x_i x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FmParams {
    pub(crate) dim: usize,
    pub(crate) embed_dim: usize,
    pub(crate) w0: f64,
    pub(crate) w: Vec<f64>,
    pub(crate) v: Vec<f64>,
}

impl FmParams {
    /// Builds from explicit values, validating shapes and finiteness.
    pub fn new(dim: usize, embed_dim: usize, w0: f64, w: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if embed_dim == 0 {
            return Err(Error::validation("embedding size must be at least 1"));
        }
        if w.len() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: w.len(),
            });
        }
        if v.len() != dim * embed_dim {
            return Err(Error::DimMismatch {
                expected: dim * embed_dim,
                got: v.len(),
            });
        }
        if !w0.is_finite()
            || w.iter().any(|x| !x.is_finite())
            || v.iter().any(|x| !x.is_finite())
        {
            return Err(Error::NonFinite("model parameters".into()));
        }
        Ok(FmParams {
            dim,
            embed_dim,
            w0,
            w,
            v,
        })
    }

    /// All-zero parameters.
    pub fn zeros(dim: usize, embed_dim: usize) -> Result<Self> {
        Self::new(dim, embed_dim, 0.0, vec![0.0; dim], vec![0.0; dim * embed_dim])
    }

    /// Fresh model: embeddings drawn from `Normal(0, 0.01^2)`, linear
    /// part zero, so initial scores sit near the decision boundary.
    pub fn init<R: Rng>(dim: usize, embed_dim: usize, rng: &mut R) -> Result<Self> {
        let mut params = Self::zeros(dim, embed_dim)?;
        let normal = Normal::new(0.0, INIT_SIGMA).expect("valid sigma");
        for slot in params.v.iter_mut() {
            *slot = normal.sample(rng);
        }
        Ok(params)
    }

    /// Feature-space width `m`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Embedding size `d`.
    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    /// Flat row-major embedding matrix.
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Embedding row of feature `i`.
    pub fn embedding(&self, i: usize) -> &[f64] {
        &self.v[i * self.embed_dim..(i + 1) * self.embed_dim]
    }

    /// Score with the per-component sums `s_k = sum_i v_ik x_i` written
    /// into `sums`, which the gradient pass reuses.
    pub(crate) fn score_with_sums(&self, x: &SparseVector, sums: &mut [f64]) -> f64 {
        debug_assert_eq!(x.dim(), self.dim);
        debug_assert_eq!(sums.len(), self.embed_dim);
        sums.fill(0.0);
        let mut linear = 0.0;
        let mut square_sum = 0.0;
        for (i, xi) in x.iter() {
            let i = i as usize;
            linear += self.w[i] * xi;
            for (k, vik) in self.embedding(i).iter().enumerate() {
                let t = vik * xi;
                sums[k] += t;
                square_sum += t * t;
            }
        }
        let sum_square: f64 = sums.iter().map(|s| s * s).sum();
        self.w0 + linear + 0.5 * (sum_square - square_sum)
    }

    /// The pairwise interaction term alone,
    /// `q(x) = 1/2 sum_k [(sum_i v_ik x_i)^2 - sum_i v_ik^2 x_i^2]`,
    /// in `O(d * nnz)`.
    pub fn pairwise_term(&self, x: &SparseVector) -> f64 {
        let mut sums = vec![0.0; self.embed_dim];
        let mut square_sum = 0.0;
        for (i, xi) in x.iter() {
            for (k, vik) in self.embedding(i as usize).iter().enumerate() {
                let t = vik * xi;
                sums[k] += t;
                square_sum += t * t;
            }
        }
        let sum_square: f64 = sums.iter().map(|s| s * s).sum();
        0.5 * (sum_square - square_sum)
    }
}

/// Model score in `O(d * nnz)` via the reformulated pairwise term.
pub fn predict(params: &FmParams, x: &SparseVector) -> Result<f64> {
    if x.dim() != params.dim {
        return Err(Error::DimMismatch {
            expected: params.dim,
            got: x.dim(),
        });
    }
    let mut sums = vec![0.0; params.embed_dim];
    Ok(params.score_with_sums(x, &mut sums))
}

/// Reference score: densifies the input and runs the quadratic double
/// loop over all feature pairs. Oracle for `predict`, not for training.
pub fn predict_naive(params: &FmParams, x: &SparseVector) -> Result<f64> {
    if x.dim() != params.dim {
        return Err(Error::DimMismatch {
            expected: params.dim,
            got: x.dim(),
        });
    }
    let dense = x.to_dense();
    let m = params.dim;
    let d = params.embed_dim;
    let mut out = params.w0;
    for (wi, xi) in params.w.iter().zip(&dense) {
        out += wi * xi;
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let mut dot = 0.0;
            for k in 0..d {
                dot += params.v[i * d + k] * params.v[j * d + k];
            }
            out += dot * dense[i] * dense[j];
        }
    }
    Ok(out)
}

/// Numerically stable logistic sigmoid.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Logistic loss `log(1 + exp(score)) - y * score` for labels in
/// `[0, 1]`, including the soft labels produced by mixing. The branch
/// form never overflows for large scores.
pub fn logistic_loss(score: f64, y: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&y));
    if score > 0.0 {
        (1.0 - y) * score + (-score).exp().ln_1p()
    } else {
        score.exp().ln_1p() - y * score
    }
}

/// Gradient of the mean logistic loss, shaped like [`FmParams`].
///
/// Coordinates of features absent from the batch stay exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FmGrads {
    pub w0: f64,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
}

impl FmGrads {
    pub fn zeros(dim: usize, embed_dim: usize) -> Self {
        FmGrads {
            w0: 0.0,
            w: vec![0.0; dim],
            v: vec![0.0; dim * embed_dim],
        }
    }
}

/// Mean-loss gradient over a nonempty batch.
///
/// Per example the chain rule gives coefficient `sigmoid(f) - y`;
/// parameter derivatives are `1` for the bias, `x_i` for linear
/// weights, and `x_i * s_k - v_ik * x_i^2` for embeddings, with
/// `s_k` the component sums from the forward pass.
pub fn gradients(params: &FmParams, batch: &[crate::sparse::LabeledExample]) -> Result<FmGrads> {
    gradients_with_loss(params, batch).map(|(g, _)| g)
}

/// Gradient plus the mean loss of the same forward passes.
pub fn gradients_with_loss(
    params: &FmParams,
    batch: &[crate::sparse::LabeledExample],
) -> Result<(FmGrads, f64)> {
    gradients_over(params, batch.iter())
}

/// Core accumulation over any example sequence of known length.
pub(crate) fn gradients_over<'a>(
    params: &FmParams,
    batch: impl ExactSizeIterator<Item = &'a crate::sparse::LabeledExample>,
) -> Result<(FmGrads, f64)> {
    if batch.len() == 0 {
        return Err(Error::validation("cannot take the gradient of an empty batch"));
    }
    let inv_n = 1.0 / batch.len() as f64;
    let d = params.embed_dim;
    let mut grads = FmGrads::zeros(params.dim, d);
    let mut loss = 0.0;
    let mut sums = vec![0.0; d];
    for ex in batch {
        if ex.x.dim() != params.dim {
            return Err(Error::DimMismatch {
                expected: params.dim,
                got: ex.x.dim(),
            });
        }
        let score = params.score_with_sums(&ex.x, &mut sums);
        loss += logistic_loss(score, ex.y);
        let coef = (sigmoid(score) - ex.y) * inv_n;
        grads.w0 += coef;
        if coef == 0.0 {
            continue;
        }
        for (i, xi) in ex.x.iter() {
            let i = i as usize;
            grads.w[i] += coef * xi;
            let row = i * d;
            for (k, &sk) in sums.iter().enumerate() {
                grads.v[row + k] += coef * (xi * sk - params.v[row + k] * xi * xi);
            }
        }
    }
    Ok((grads, loss * inv_n))
}
