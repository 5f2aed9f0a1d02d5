//! Adam optimizer with bias-corrected moment estimates.

use crate::error::{Error, Result};
use crate::model::{FmGrads, FmParams};

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPS: f64 = 1e-8;

/// Optimizer state: first and second moment accumulators shaped like
/// the parameters, plus the step counter and hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m_w0: f64,
    v_w0: f64,
    m_w: Vec<f64>,
    v_w: Vec<f64>,
    m_v: Vec<f64>,
    v_v: Vec<f64>,
}

impl AdamState {
    /// Fresh state with the standard defaults (beta1 0.9, beta2 0.999,
    /// eps 1e-8).
    pub fn new(dim: usize, embed_dim: usize, lr: f64) -> Result<Self> {
        Self::with_hyperparams(dim, embed_dim, lr, DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_EPS)
    }

    pub fn with_hyperparams(
        dim: usize,
        embed_dim: usize,
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
    ) -> Result<Self> {
        if !(lr >= 0.0 && lr.is_finite()) {
            return Err(Error::validation(format!("learning rate {lr} must be >= 0")));
        }
        if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) {
            return Err(Error::validation(format!(
                "betas must lie in [0, 1), got ({beta1}, {beta2})"
            )));
        }
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::validation(format!("epsilon {eps} must be positive")));
        }
        Ok(AdamState {
            lr,
            beta1,
            beta2,
            eps,
            t: 0,
            m_w0: 0.0,
            v_w0: 0.0,
            m_w: vec![0.0; dim],
            v_w: vec![0.0; dim],
            m_v: vec![0.0; dim * embed_dim],
            v_v: vec![0.0; dim * embed_dim],
        })
    }

    /// Number of updates applied so far.
    pub fn step_count(&self) -> u64 {
        self.t
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }
}

/// One Adam update of `params` in place.
///
/// Rejects non-finite gradients (naming the offending block) before
/// touching any state, and shape mismatches between state, parameters
/// and gradients.
pub fn adam_step(state: &mut AdamState, params: &mut FmParams, grads: &FmGrads) -> Result<()> {
    if state.m_w.len() != params.w.len() || state.m_v.len() != params.v.len() {
        return Err(Error::DimMismatch {
            expected: params.w.len(),
            got: state.m_w.len(),
        });
    }
    if grads.w.len() != params.w.len() || grads.v.len() != params.v.len() {
        return Err(Error::DimMismatch {
            expected: params.w.len(),
            got: grads.w.len(),
        });
    }
    if !grads.w0.is_finite() {
        return Err(Error::NonFinite("gradient block `w0`".into()));
    }
    if grads.w.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient block `w`".into()));
    }
    if grads.v.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("gradient block `V`".into()));
    }

    state.t += 1;
    let bc1 = 1.0 - state.beta1.powi(state.t as i32);
    let bc2 = 1.0 - state.beta2.powi(state.t as i32);
    let update = |m: &mut f64, v: &mut f64, theta: &mut f64, g: f64| {
        *m = state.beta1 * *m + (1.0 - state.beta1) * g;
        *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *theta -= state.lr * m_hat / (v_hat.sqrt() + state.eps);
    };

    update(&mut state.m_w0, &mut state.v_w0, &mut params.w0, grads.w0);
    for i in 0..params.w.len() {
        update(&mut state.m_w[i], &mut state.v_w[i], &mut params.w[i], grads.w[i]);
    }
    for i in 0..params.v.len() {
        update(&mut state.m_v[i], &mut state.v_v[i], &mut params.v[i], grads.v[i]);
    }
    Ok(())
}
