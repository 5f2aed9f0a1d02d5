//! Sparse factorization machines with mixup-style data augmentation.
//!
//! The crate trains 2-way factorization machines on sparse (libsvm-style)
//! data and augments training with convex combinations of sample pairs,
//! optionally steered by a per-sample saliency score. It also ships
//! calculators for the capacity-based generalization gap of the trained
//! model, an AUC/LogLoss evaluation harness, and a synthetic data
//! generator with planted feature pairs that never co-occur in training.

pub mod augment;
pub mod error;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod sparse;
pub mod special;
pub mod synth;
pub mod theory;

pub use error::{Error, Result};
pub use model::{FmParams, TrainConfig};
pub use sparse::{Dataset, LabeledExample, SparseVector};
