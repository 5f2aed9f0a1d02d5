//! Test-time feature perturbation for robustness probes.

use rand::Rng;

use crate::error::{Error, Result};
use crate::sparse::{Dataset, LabeledExample, SparseVector};

/// Adds independent uniform noise from `[-epsilon, epsilon]` to every
/// nonzero feature value, clamping the result into `[0, 1]`.
///
/// Zero coordinates stay zero, so sparsity is preserved (values pushed
/// to exactly 0 by clamping are dropped). Intended for `[0, 1]`-valued
/// features such as one-hot indicators or min-max scaled numerics.
pub fn perturb_features<R: Rng>(data: &Dataset, epsilon: f64, rng: &mut R) -> Result<Dataset> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::validation(format!(
            "noise level {epsilon} must be finite and non-negative"
        )));
    }
    if epsilon == 0.0 {
        return Ok(data.clone());
    }
    let out = data
        .iter()
        .map(|ex| {
            let mut indices = Vec::with_capacity(ex.x.nnz());
            let mut values = Vec::with_capacity(ex.x.nnz());
            for (i, v) in ex.x.iter() {
                let noisy = (v + rng.random_range(-epsilon..=epsilon)).clamp(0.0, 1.0);
                if noisy != 0.0 {
                    indices.push(i);
                    values.push(noisy);
                }
            }
            LabeledExample::new(
                SparseVector::from_sorted_unchecked(ex.x.dim(), indices, values),
                ex.y,
                ex.provenance,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(data.dim(), out)
}
