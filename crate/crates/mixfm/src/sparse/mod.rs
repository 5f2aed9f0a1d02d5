//! Sparse data representation: vectors, labeled examples, datasets.

mod encode;
mod noise;
mod parse;
mod sample;
mod split;

pub use encode::{encode_records, ColumnKind, ColumnSpec, EncodingSchema, OovPolicy, RawTable};
pub use noise::perturb_features;
pub use parse::{
    format_sparse_line, parse_sparse_line, read_dataset, write_dataset, ParseOptions,
};
pub use sample::negative_sample;
pub use split::split_dataset;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest magnitude a stored feature value may have. The capacity and
/// gap calculators assume inputs live in the unit sup-norm ball, so the
/// ingestion layer rejects (or clamps) anything outside it.
pub const MAX_ABS_VALUE: f64 = 1.0;

/// A sparse vector in `R^m` stored as parallel (index, value) arrays.
///
/// Invariants: indices strictly increasing and `< dim`, values nonzero
/// and finite with `|v| <= 1`. Zero-valued features are simply absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Builds a vector from arbitrary (index, value) pairs.
    ///
    /// Pairs are sorted by index; exact zeros are dropped. Duplicate
    /// indices, out-of-range indices, non-finite values and values with
    /// `|v| > 1` are rejected.
    pub fn new(dim: usize, mut entries: Vec<(u32, f64)>) -> Result<Self> {
        entries.retain(|&(_, v)| v != 0.0);
        entries.sort_by_key(|&(i, _)| i);
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            if (i as usize) >= dim {
                return Err(Error::validation(format!(
                    "feature index {i} out of range for dimension {dim}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("feature {i}")));
            }
            if v.abs() > MAX_ABS_VALUE {
                return Err(Error::validation(format!(
                    "feature {i} has value {v} outside [-1, 1]; \
                     re-encode or enable clamping"
                )));
            }
            if indices.last() == Some(&i) {
                return Err(Error::validation(format!("duplicate feature index {i}")));
            }
            indices.push(i);
            values.push(v);
        }
        Ok(SparseVector {
            dim,
            indices,
            values,
        })
    }

    /// The all-zero vector.
    pub fn empty(dim: usize) -> Self {
        SparseVector {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from entries already sorted, deduplicated, nonzero and in
    /// range. Used on hot paths that construct entries canonically.
    pub(crate) fn from_sorted_unchecked(dim: usize, indices: Vec<u32>, values: Vec<f64>) -> Self {
        debug_assert_eq!(indices.len(), values.len());
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(indices.iter().all(|&i| (i as usize) < dim));
        debug_assert!(values
            .iter()
            .all(|v| *v != 0.0 && v.abs() <= MAX_ABS_VALUE + 1e-9));
        SparseVector {
            dim,
            indices,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates over (index, value) pairs in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Value at `index`, zero if absent.
    pub fn get(&self, index: u32) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i as usize] = v;
        }
        out
    }

    /// Re-declares the ambient dimension, e.g. after a whole file has
    /// been scanned for its maximum feature index.
    pub fn with_dim(mut self, dim: usize) -> Result<Self> {
        if let Some(&last) = self.indices.last() {
            if (last as usize) >= dim {
                return Err(Error::validation(format!(
                    "cannot shrink dimension to {dim}: entry at index {last}"
                )));
            }
        }
        self.dim = dim;
        Ok(self)
    }
}

/// How an example entered the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// Came from the raw data.
    Natural,
    /// Convex combination of two natural parents.
    Mixed,
    /// Verbatim duplicate of a natural example.
    Copied,
}

/// A sparse feature vector with its label in `[0, 1]`.
///
/// Natural examples carry hard labels `{0, 1}`; mixed examples carry the
/// interpolated soft label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub x: SparseVector,
    pub y: f64,
    pub provenance: Provenance,
}

impl LabeledExample {
    pub fn new(x: SparseVector, y: f64, provenance: Provenance) -> Result<Self> {
        if !(0.0..=1.0).contains(&y) {
            return Err(Error::validation(format!("label {y} outside [0, 1]")));
        }
        Ok(LabeledExample { x, y, provenance })
    }

    pub fn natural(x: SparseVector, y: f64) -> Result<Self> {
        Self::new(x, y, Provenance::Natural)
    }
}

/// An immutable collection of labeled examples sharing one feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    dim: usize,
    tau: usize,
    examples: Vec<LabeledExample>,
}

impl Dataset {
    pub fn new(dim: usize, examples: Vec<LabeledExample>) -> Result<Self> {
        for (i, ex) in examples.iter().enumerate() {
            if ex.x.dim() != dim {
                return Err(Error::validation(format!(
                    "example {i} has dimension {}, dataset declares {dim}",
                    ex.x.dim()
                )));
            }
        }
        let tau = examples.iter().map(|ex| ex.x.nnz()).max().unwrap_or(0);
        Ok(Dataset {
            dim,
            tau,
            examples,
        })
    }

    pub fn empty(dim: usize) -> Self {
        Dataset {
            dim,
            tau: 0,
            examples: Vec::new(),
        }
    }

    /// Feature-space width `m`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Maximum nonzero count over all examples.
    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledExample> {
        self.examples.iter()
    }

    pub fn get(&self, i: usize) -> &LabeledExample {
        &self.examples[i]
    }

    pub fn labels(&self) -> Vec<f64> {
        self.examples.iter().map(|ex| ex.y).collect()
    }

    /// Concatenates two datasets over the same feature space.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut examples = self.examples.clone();
        examples.extend(other.examples.iter().cloned());
        Dataset::new(self.dim, examples)
    }
}
