//! Python bindings for the mixfm training engine.
//!
//! The module mirrors the core crate: sparse vectors and datasets,
//! factorization-machine training with mixing-based augmentation,
//! AUC/LogLoss evaluation, the synthetic planted-pair generator, and
//! the capacity-based generalization-gap calculators.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;

use mixfm::augment::{
    copy_augment, generate_mix_batch, generate_salient_batch, mix_pair, sample_lambda,
    train_augmented, EpochRecord, MixConfig, MixMode,
};
use mixfm::metrics::{self, EvalReport, TTest};
use mixfm::model::{load_checkpoint, predict, save_checkpoint, sigmoid};
use mixfm::rng::stream;
use mixfm::sparse::{read_dataset, write_dataset, ParseOptions, Provenance, SparseVector};
use mixfm::synth::{generate, SynthSpec};
use mixfm::theory::{
    self, BoundInputs, BoundReport, fm_generalization_gap, mixfm_generalization_gap,
};
use mixfm::{Dataset, Error, FmParams, LabeledExample, TrainConfig};

/// Maps crate errors onto Python exception types by failure class.
fn err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        Error::NonFinite(what) => PyArithmeticError::new_err(format!("non-finite value in {what}")),
        other => PyValueError::new_err(other.to_string()),
    }
}

// ---------------------------------------------------------------------
// Sparse data

/// Sorted sparse vector with a fixed ambient dimension.
#[pyclass(name = "SparseVector", from_py_object)]
#[derive(Clone)]
struct PySparseVector {
    inner: SparseVector,
}

#[pymethods]
impl PySparseVector {
    #[new]
    fn new(dim: usize, entries: Vec<(u32, f64)>) -> PyResult<Self> {
        Ok(PySparseVector {
            inner: SparseVector::new(dim, entries).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    #[getter]
    fn indices(&self) -> Vec<u32> {
        self.inner.indices().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    /// Value at `index`, zero when absent.
    fn get(&self, index: u32) -> f64 {
        self.inner.get(index)
    }

    fn to_dense(&self) -> Vec<f64> {
        self.inner.to_dense()
    }

    fn __len__(&self) -> usize {
        self.inner.nnz()
    }

    fn __repr__(&self) -> String {
        format!(
            "SparseVector(dim={}, nnz={})",
            self.inner.dim(),
            self.inner.nnz()
        )
    }
}

/// A sparse vector with its label in [0, 1].
#[pyclass(name = "LabeledExample", from_py_object)]
#[derive(Clone)]
struct PyLabeledExample {
    inner: LabeledExample,
}

#[pymethods]
impl PyLabeledExample {
    #[new]
    #[pyo3(signature = (x, y, mixed = false))]
    fn new(x: PySparseVector, y: f64, mixed: bool) -> PyResult<Self> {
        let provenance = if mixed { Provenance::Mixed } else { Provenance::Natural };
        Ok(PyLabeledExample {
            inner: LabeledExample::new(x.inner, y, provenance).map_err(err)?,
        })
    }

    #[getter]
    fn x(&self) -> PySparseVector {
        PySparseVector {
            inner: self.inner.x.clone(),
        }
    }

    #[getter]
    fn y(&self) -> f64 {
        self.inner.y
    }

    /// True when the example was synthesized by mixing, not observed.
    #[getter]
    fn mixed(&self) -> bool {
        self.inner.provenance == Provenance::Mixed
    }

    fn __repr__(&self) -> String {
        format!(
            "LabeledExample(y={}, nnz={}, mixed={})",
            self.inner.y,
            self.inner.x.nnz(),
            self.mixed()
        )
    }
}

/// Immutable set of labeled examples sharing one feature space.
#[pyclass(name = "Dataset", from_py_object)]
#[derive(Clone)]
struct PyDataset {
    inner: Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    fn new(dim: usize, examples: Vec<PyLabeledExample>) -> PyResult<Self> {
        let examples = examples.into_iter().map(|e| e.inner).collect();
        Ok(PyDataset {
            inner: Dataset::new(dim, examples).map_err(err)?,
        })
    }

    /// Parses `label idx:val ...` lines; honors `#dim` and `#mixed`
    /// comment directives.
    #[staticmethod]
    #[pyo3(signature = (text, clamp = false))]
    fn from_text(text: &str, clamp: bool) -> PyResult<Self> {
        let opts = ParseOptions { clamp_values: clamp };
        Ok(PyDataset {
            inner: read_dataset(text.as_bytes(), opts).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, clamp = false))]
    fn load(path: PathBuf, clamp: bool) -> PyResult<Self> {
        let file = File::open(&path).map_err(|e| err(Error::Io(e)))?;
        let opts = ParseOptions { clamp_values: clamp };
        Ok(PyDataset {
            inner: read_dataset(BufReader::new(file), opts).map_err(err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        let file = File::create(&path).map_err(|e| err(Error::Io(e)))?;
        let mut writer = BufWriter::new(file);
        write_dataset(&mut writer, &self.inner).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Largest number of nonzero features in any example.
    #[getter]
    fn tau(&self) -> usize {
        self.inner.tau()
    }

    fn example(&self, i: usize) -> PyResult<PyLabeledExample> {
        if i >= self.inner.len() {
            return Err(PyValueError::new_err(format!(
                "index {i} out of range for {} examples",
                self.inner.len()
            )));
        }
        Ok(PyLabeledExample {
            inner: self.inner.get(i).clone(),
        })
    }

    fn labels(&self) -> Vec<f64> {
        self.inner.labels()
    }

    fn concat(&self, other: &PyDataset) -> PyResult<Self> {
        Ok(PyDataset {
            inner: self.inner.concat(&other.inner).map_err(err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(len={}, dim={}, tau={})",
            self.inner.len(),
            self.inner.dim(),
            self.inner.tau()
        )
    }
}

// ---------------------------------------------------------------------
// Configuration

/// Optimizer and model-shape settings.
#[pyclass(name = "TrainConfig", from_py_object)]
#[derive(Clone)]
struct PyTrainConfig {
    #[pyo3(get, set)]
    epochs: usize,
    #[pyo3(get, set)]
    batch_size: usize,
    #[pyo3(get, set)]
    learning_rate: f64,
    #[pyo3(get, set)]
    embed_dim: usize,
    #[pyo3(get, set)]
    seed: u64,
    #[pyo3(get, set)]
    weight_decay: f64,
}

impl PyTrainConfig {
    fn inner(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            embed_dim: self.embed_dim,
            seed: self.seed,
            weight_decay: self.weight_decay,
        }
    }
}

#[pymethods]
impl PyTrainConfig {
    #[new]
    #[pyo3(signature = (
        epochs = 30,
        batch_size = 2048,
        learning_rate = 1e-3,
        embed_dim = 64,
        seed = 42,
        weight_decay = 0.0,
    ))]
    fn new(
        epochs: usize,
        batch_size: usize,
        learning_rate: f64,
        embed_dim: usize,
        seed: u64,
        weight_decay: f64,
    ) -> PyResult<Self> {
        let cfg = PyTrainConfig {
            epochs,
            batch_size,
            learning_rate,
            embed_dim,
            seed,
            weight_decay,
        };
        cfg.inner().validate().map_err(err)?;
        Ok(cfg)
    }

    fn __repr__(&self) -> String {
        format!(
            "TrainConfig(epochs={}, batch_size={}, learning_rate={}, embed_dim={}, seed={}, weight_decay={})",
            self.epochs, self.batch_size, self.learning_rate, self.embed_dim, self.seed,
            self.weight_decay
        )
    }
}

/// Augmentation settings; `mode` is one of "none", "copy", "mix",
/// "saliency".
#[pyclass(name = "MixConfig", from_py_object)]
#[derive(Clone)]
struct PyMixConfig {
    #[pyo3(get, set)]
    mode: String,
    #[pyo3(get, set)]
    alpha: f64,
    #[pyo3(get, set)]
    beta: f64,
    #[pyo3(get, set)]
    n_prime: usize,
    #[pyo3(get, set)]
    p: usize,
    #[pyo3(get, set)]
    saliency_abs: bool,
}

impl PyMixConfig {
    fn inner(&self) -> PyResult<MixConfig> {
        let mode = match self.mode.to_ascii_lowercase().as_str() {
            "none" => MixMode::None,
            "copy" => MixMode::Copy,
            "mix" => MixMode::Mix,
            "saliency" => MixMode::Saliency,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown mode `{other}`; expected none, copy, mix or saliency"
                )))
            }
        };
        let cfg = MixConfig {
            alpha: self.alpha,
            beta: self.beta,
            n_prime: self.n_prime,
            p: self.p,
            mode,
            saliency_abs: self.saliency_abs,
        };
        cfg.validate().map_err(err)?;
        Ok(cfg)
    }
}

#[pymethods]
impl PyMixConfig {
    #[new]
    #[pyo3(signature = (
        mode = "none".to_string(),
        alpha = 1.0,
        beta = 1.0,
        n_prime = 0,
        p = 10,
        saliency_abs = false,
    ))]
    fn new(
        mode: String,
        alpha: f64,
        beta: f64,
        n_prime: usize,
        p: usize,
        saliency_abs: bool,
    ) -> PyResult<Self> {
        let cfg = PyMixConfig {
            mode,
            alpha,
            beta,
            n_prime,
            p,
            saliency_abs,
        };
        cfg.inner()?;
        Ok(cfg)
    }

    fn __repr__(&self) -> String {
        format!(
            "MixConfig(mode='{}', alpha={}, beta={}, n_prime={}, p={}, saliency_abs={})",
            self.mode, self.alpha, self.beta, self.n_prime, self.p, self.saliency_abs
        )
    }
}

// ---------------------------------------------------------------------
// Model

/// Factorization-machine parameters: bias, linear weights, embeddings.
#[pyclass(name = "FmParams", from_py_object)]
#[derive(Clone)]
struct PyFmParams {
    inner: FmParams,
}

#[pymethods]
impl PyFmParams {
    #[new]
    fn new(dim: usize, embed_dim: usize, w0: f64, w: Vec<f64>, v: Vec<f64>) -> PyResult<Self> {
        Ok(PyFmParams {
            inner: FmParams::new(dim, embed_dim, w0, w, v).map_err(err)?,
        })
    }

    #[staticmethod]
    fn zeros(dim: usize, embed_dim: usize) -> PyResult<Self> {
        Ok(PyFmParams {
            inner: FmParams::zeros(dim, embed_dim).map_err(err)?,
        })
    }

    /// Fresh random parameters from a seeded stream, as used at the
    /// start of training.
    #[staticmethod]
    fn init(dim: usize, embed_dim: usize, seed: u64) -> PyResult<Self> {
        Ok(PyFmParams {
            inner: FmParams::init(dim, embed_dim, &mut stream(seed, "init")).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let file = File::open(&path).map_err(|e| err(Error::Io(e)))?;
        Ok(PyFmParams {
            inner: load_checkpoint(&mut BufReader::new(file)).map_err(err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        let file = File::create(&path).map_err(|e| err(Error::Io(e)))?;
        let mut writer = BufWriter::new(file);
        save_checkpoint(&mut writer, &self.inner).map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn embed_dim(&self) -> usize {
        self.inner.embed_dim()
    }

    #[getter]
    fn w0(&self) -> f64 {
        self.inner.w0()
    }

    #[getter]
    fn w(&self) -> Vec<f64> {
        self.inner.w().to_vec()
    }

    /// Embedding matrix flattened row-major: feature i occupies
    /// `v[i*embed_dim .. (i+1)*embed_dim]`.
    #[getter]
    fn v(&self) -> Vec<f64> {
        self.inner.v().to_vec()
    }

    fn embedding(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.dim() {
            return Err(PyValueError::new_err(format!(
                "feature {i} out of range for dim {}",
                self.inner.dim()
            )));
        }
        Ok(self.inner.embedding(i).to_vec())
    }

    /// Raw score (log-odds) of one example.
    fn predict(&self, x: &PySparseVector) -> PyResult<f64> {
        predict(&self.inner, &x.inner).map_err(err)
    }

    /// Predicted probability of the positive class.
    fn predict_proba(&self, x: &PySparseVector) -> PyResult<f64> {
        Ok(sigmoid(predict(&self.inner, &x.inner).map_err(err)?))
    }

    /// Raw scores over a whole dataset, in example order.
    fn scores(&self, data: &PyDataset) -> PyResult<Vec<f64>> {
        data.inner
            .iter()
            .map(|ex| predict(&self.inner, &ex.x).map_err(err))
            .collect()
    }

    /// Total squared embedding mass, the capacity that drives the
    /// generalization bounds.
    #[getter]
    fn gamma(&self) -> f64 {
        theory::gamma_of(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "FmParams(dim={}, embed_dim={}, gamma={:.6})",
            self.inner.dim(),
            self.inner.embed_dim(),
            theory::gamma_of(&self.inner)
        )
    }
}

// ---------------------------------------------------------------------
// Evaluation

/// AUC and LogLoss of one model on one dataset.
#[pyclass(name = "EvalReport", from_py_object)]
#[derive(Clone)]
struct PyEvalReport {
    inner: EvalReport,
}

#[pymethods]
impl PyEvalReport {
    #[getter]
    fn auc(&self) -> f64 {
        self.inner.auc
    }

    #[getter]
    fn logloss(&self) -> f64 {
        self.inner.logloss
    }

    #[getter]
    fn n_examples(&self) -> usize {
        self.inner.n_examples
    }

    #[getter]
    fn n_positive(&self) -> usize {
        self.inner.n_positive
    }

    fn __repr__(&self) -> String {
        format!(
            "EvalReport(auc={:.6}, logloss={:.6}, n_examples={}, n_positive={})",
            self.inner.auc, self.inner.logloss, self.inner.n_examples, self.inner.n_positive
        )
    }
}

/// One epoch of training history.
#[pyclass(name = "EpochRecord", from_py_object)]
#[derive(Clone)]
struct PyEpochRecord {
    inner: EpochRecord,
}

#[pymethods]
impl PyEpochRecord {
    #[getter]
    fn epoch(&self) -> usize {
        self.inner.epoch
    }

    #[getter]
    fn train_loss(&self) -> f64 {
        self.inner.train_loss
    }

    #[getter]
    fn train(&self) -> PyEvalReport {
        PyEvalReport {
            inner: self.inner.train.clone(),
        }
    }

    #[getter]
    fn valid(&self) -> Option<PyEvalReport> {
        self.inner.valid.clone().map(|inner| PyEvalReport { inner })
    }

    #[getter]
    fn test(&self) -> Option<PyEvalReport> {
        self.inner.test.clone().map(|inner| PyEvalReport { inner })
    }

    #[getter]
    fn seconds(&self) -> f64 {
        self.inner.seconds
    }

    fn __repr__(&self) -> String {
        format!(
            "EpochRecord(epoch={}, train_loss={:.6}, train_auc={:.6})",
            self.inner.epoch, self.inner.train_loss, self.inner.train.auc
        )
    }
}

/// Paired t-test outcome; `p_value` is None when the differences are
/// constant.
#[pyclass(name = "TTest", from_py_object)]
#[derive(Clone)]
struct PyTTest {
    inner: TTest,
}

#[pymethods]
impl PyTTest {
    #[getter]
    fn p_value(&self) -> Option<f64> {
        self.inner.p_value()
    }

    #[getter]
    fn t(&self) -> Option<f64> {
        match self.inner {
            TTest::Significance { t, .. } => Some(t),
            TTest::Degenerate { .. } => None,
        }
    }

    #[getter]
    fn df(&self) -> Option<f64> {
        match self.inner {
            TTest::Significance { df, .. } => Some(df),
            TTest::Degenerate { .. } => None,
        }
    }

    /// Constant difference between the pairs, present only in the
    /// degenerate (zero-variance) case.
    #[getter]
    fn mean_diff(&self) -> Option<f64> {
        match self.inner {
            TTest::Significance { .. } => None,
            TTest::Degenerate { mean_diff } => Some(mean_diff),
        }
    }

    #[getter]
    fn degenerate(&self) -> bool {
        matches!(self.inner, TTest::Degenerate { .. })
    }

    fn is_significant(&self, alpha: f64) -> bool {
        self.inner.is_significant(alpha)
    }

    fn __repr__(&self) -> String {
        match self.inner {
            TTest::Significance { t, p, df } => {
                format!("TTest(t={t:.4}, p={p:.4}, df={df})")
            }
            TTest::Degenerate { mean_diff } => {
                format!("TTest(degenerate, mean_diff={mean_diff:+.6})")
            }
        }
    }
}

// ---------------------------------------------------------------------
// Theory

/// One generalization-gap calculation with its inputs and terms.
#[pyclass(name = "BoundReport", from_py_object)]
#[derive(Clone)]
struct PyBoundReport {
    inner: BoundReport,
}

#[pymethods]
impl PyBoundReport {
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d
    }

    #[getter]
    fn tau(&self) -> usize {
        self.inner.tau
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    #[getter]
    fn rademacher_term(&self) -> f64 {
        self.inner.rademacher_term
    }

    #[getter]
    fn confidence_term(&self) -> f64 {
        self.inner.confidence_term
    }

    #[getter]
    fn total_gap(&self) -> f64 {
        self.inner.total_gap
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "BoundReport(gamma={:.6}, d={}, tau={}, n={}, total_gap={:.6})",
            self.inner.gamma, self.inner.d, self.inner.tau, self.inner.n, self.inner.total_gap
        )
    }
}

// ---------------------------------------------------------------------
// Synthetic data

/// Generated splits plus the recorded ground-truth model.
#[pyclass(name = "SynthOutput")]
struct PySynthOutput {
    #[pyo3(get)]
    train: PyDataset,
    #[pyo3(get)]
    valid: PyDataset,
    #[pyo3(get)]
    test: PyDataset,
    truth_json: String,
    truth_params: PyFmParams,
}

#[pymethods]
impl PySynthOutput {
    /// Ground truth as a JSON document: layout, blocked pairs, the
    /// joint score offset, and the smooth generating model.
    fn truth_json(&self) -> String {
        self.truth_json.clone()
    }

    /// The smooth part of the generating model (without the blocked
    /// pairs' joint offsets).
    fn truth_params(&self) -> PyFmParams {
        self.truth_params.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "SynthOutput(train={}, valid={}, test={})",
            self.train.inner.len(),
            self.valid.inner.len(),
            self.test.inner.len()
        )
    }
}

// ---------------------------------------------------------------------
// Module functions

/// Trains a factorization machine, optionally with per-epoch mixing
/// augmentation; returns the parameters and per-epoch history.
#[pyfunction]
#[pyo3(signature = (data, config = None, mix = None, valid = None, test = None))]
fn train(
    data: &PyDataset,
    config: Option<PyTrainConfig>,
    mix: Option<PyMixConfig>,
    valid: Option<&PyDataset>,
    test: Option<&PyDataset>,
) -> PyResult<(PyFmParams, Vec<PyEpochRecord>)> {
    let cfg = match config {
        Some(c) => c.inner(),
        None => TrainConfig::default(),
    };
    let mix_cfg = match mix {
        Some(m) => m.inner()?,
        None => MixConfig::default(),
    };
    let (params, history) = train_augmented(
        &data.inner,
        &cfg,
        &mix_cfg,
        valid.map(|d| &d.inner),
        test.map(|d| &d.inner),
    )
    .map_err(err)?;
    Ok((
        PyFmParams { inner: params },
        history
            .into_iter()
            .map(|inner| PyEpochRecord { inner })
            .collect(),
    ))
}

/// AUC and LogLoss of a model on a dataset.
#[pyfunction]
fn evaluate(params: &PyFmParams, data: &PyDataset) -> PyResult<PyEvalReport> {
    Ok(PyEvalReport {
        inner: metrics::evaluate(&params.inner, &data.inner).map_err(err)?,
    })
}

/// Rank-based AUC over raw scores and boolean labels.
#[pyfunction]
fn auc(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    metrics::auc(&scores, &labels).map_err(err)
}

/// Mean logistic loss over raw scores and labels in [0, 1].
#[pyfunction]
fn logloss(scores: Vec<f64>, labels: Vec<f64>) -> PyResult<f64> {
    metrics::logloss(&scores, &labels).map_err(err)
}

/// Two-sided paired t-test of `a` against `b`.
#[pyfunction]
fn paired_t_test(a: Vec<f64>, b: Vec<f64>) -> PyResult<PyTTest> {
    Ok(PyTTest {
        inner: metrics::paired_t_test(&a, &b).map_err(err)?,
    })
}

/// Generates the synthetic planted-pair dataset: three splits whose
/// blocked feature pairs never co-occur in train or valid but are
/// forced into a fraction of test examples.
#[pyfunction]
#[pyo3(signature = (
    n = 5000,
    fields = 5,
    field_size = 40,
    n_blocked = 5,
    test_pair_fraction = 0.5,
    ratios = (0.7, 0.1, 0.2),
    seed = 42,
    truth_embed_dim = 4,
    pair_boost = 3.0,
    linear_sigma = 0.6,
    embed_sigma = 0.1,
))]
#[allow(clippy::too_many_arguments)]
fn synth(
    n: usize,
    fields: usize,
    field_size: usize,
    n_blocked: usize,
    test_pair_fraction: f64,
    ratios: (f64, f64, f64),
    seed: u64,
    truth_embed_dim: usize,
    pair_boost: f64,
    linear_sigma: f64,
    embed_sigma: f64,
) -> PyResult<PySynthOutput> {
    let spec = SynthSpec {
        n,
        fields,
        field_size,
        n_blocked,
        test_pair_fraction,
        ratios,
        seed,
        truth_embed_dim,
        pair_boost,
        linear_sigma,
        embed_sigma,
    };
    let out = generate(&spec).map_err(err)?;
    let truth_json = serde_json::to_string_pretty(&out.truth)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let truth_params = PyFmParams {
        inner: out.truth.params().map_err(err)?,
    };
    Ok(PySynthOutput {
        train: PyDataset { inner: out.train },
        valid: PyDataset { inner: out.valid },
        test: PyDataset { inner: out.test },
        truth_json,
        truth_params,
    })
}

/// Draws mixing coefficients from the folded Beta; every draw lies in
/// [0.5, 1].
#[pyfunction]
#[pyo3(signature = (n, alpha = 1.0, beta = 1.0, seed = 42))]
fn sample_lambdas(n: usize, alpha: f64, beta: f64, seed: u64) -> PyResult<Vec<f64>> {
    let cfg = MixConfig {
        alpha,
        beta,
        ..MixConfig::default()
    };
    let mut rng = stream(seed, "mix");
    (0..n)
        .map(|_| sample_lambda(&cfg, &mut rng).map_err(err))
        .collect()
}

/// Convex combination of two examples: features merge over the support
/// union, labels interpolate.
#[pyfunction(name = "mix_pair")]
fn mix_pair_py(
    a: &PyLabeledExample,
    b: &PyLabeledExample,
    lambda: f64,
) -> PyResult<PyLabeledExample> {
    Ok(PyLabeledExample {
        inner: mix_pair(&a.inner, &b.inner, lambda).map_err(err)?,
    })
}

/// One epoch's worth of mixed examples drawn from `data`.
#[pyfunction]
#[pyo3(signature = (data, mix, seed = 42))]
fn mix_batch(data: &PyDataset, mix: &PyMixConfig, seed: u64) -> PyResult<PyDataset> {
    let cfg = mix.inner()?;
    Ok(PyDataset {
        inner: generate_mix_batch(&data.inner, &cfg, &mut stream(seed, "mix")).map_err(err)?,
    })
}

/// Mixed examples where each first parent keeps the best of `mix.p`
/// candidate partners by the model's saliency score.
#[pyfunction]
#[pyo3(signature = (params, data, mix, seed = 42))]
fn salient_batch(
    params: &PyFmParams,
    data: &PyDataset,
    mix: &PyMixConfig,
    seed: u64,
) -> PyResult<PyDataset> {
    let cfg = mix.inner()?;
    Ok(PyDataset {
        inner: generate_salient_batch(&params.inner, &data.inner, &cfg, &mut stream(seed, "mix"))
            .map_err(err)?,
    })
}

/// Verbatim duplicates of `n_prime` distinct examples (control
/// condition for augmentation studies).
#[pyfunction]
#[pyo3(signature = (data, n_prime, seed = 42))]
fn copy_batch(data: &PyDataset, n_prime: usize, seed: u64) -> PyResult<PyDataset> {
    Ok(PyDataset {
        inner: copy_augment(&data.inner, n_prime, &mut stream(seed, "mix")).map_err(err)?,
    })
}

/// Weighted saliency of one example under the model: the loss gradient
/// with respect to the score, times the score.
#[pyfunction]
fn saliency(params: &PyFmParams, ex: &PyLabeledExample) -> PyResult<f64> {
    mixfm::augment::saliency(&params.inner, &ex.inner).map_err(err)
}

/// Total squared embedding mass of a model.
#[pyfunction]
fn gamma_of(params: &PyFmParams) -> f64 {
    theory::gamma_of(&params.inner)
}

/// Data-dependent capacity: embedding mass weighted by how strongly
/// the dataset exercises each interaction.
#[pyfunction]
fn gamma_tilde_of(params: &PyFmParams, data: &PyDataset) -> PyResult<f64> {
    theory::gamma_tilde_of(&params.inner, &data.inner).map_err(err)
}

/// Mean squared pairwise-term output of the model over the dataset.
#[pyfunction]
fn interaction_energy(params: &PyFmParams, data: &PyDataset) -> PyResult<f64> {
    theory::interaction_energy(&params.inner, &data.inner).map_err(err)
}

/// Generalization gap of the plain model class with capacity `gamma`.
#[pyfunction]
#[pyo3(signature = (gamma, d, tau, n, delta = 0.05))]
fn fm_gap(gamma: f64, d: usize, tau: usize, n: usize, delta: f64) -> PyResult<PyBoundReport> {
    let inputs = BoundInputs::new(gamma, d, tau, n, delta).map_err(err)?;
    Ok(PyBoundReport {
        inner: fm_generalization_gap(&inputs).map_err(err)?,
    })
}

/// Generalization gap of the mixing-trained class, driven by the
/// data-dependent capacity `gamma_tilde`.
#[pyfunction]
#[pyo3(signature = (gamma_tilde, d, tau, n, delta = 0.05))]
fn mixfm_gap(
    gamma_tilde: f64,
    d: usize,
    tau: usize,
    n: usize,
    delta: f64,
) -> PyResult<PyBoundReport> {
    let inputs = BoundInputs::new(gamma_tilde, d, tau, n, delta).map_err(err)?;
    Ok(PyBoundReport {
        inner: mixfm_generalization_gap(gamma_tilde, &inputs).map_err(err)?,
    })
}

/// Capacity above which the mixing-trained class has the smaller
/// norm-budget bound at embedding size `d`.
#[pyfunction]
fn gamma_threshold(d: usize) -> f64 {
    theory::gamma_threshold(d)
}

#[pymodule]
fn mixfm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySparseVector>()?;
    m.add_class::<PyLabeledExample>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyTrainConfig>()?;
    m.add_class::<PyMixConfig>()?;
    m.add_class::<PyFmParams>()?;
    m.add_class::<PyEvalReport>()?;
    m.add_class::<PyEpochRecord>()?;
    m.add_class::<PyTTest>()?;
    m.add_class::<PyBoundReport>()?;
    m.add_class::<PySynthOutput>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(logloss, m)?)?;
    m.add_function(wrap_pyfunction!(paired_t_test, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(sample_lambdas, m)?)?;
    m.add_function(wrap_pyfunction!(mix_pair_py, m)?)?;
    m.add_function(wrap_pyfunction!(mix_batch, m)?)?;
    m.add_function(wrap_pyfunction!(salient_batch, m)?)?;
    m.add_function(wrap_pyfunction!(copy_batch, m)?)?;
    m.add_function(wrap_pyfunction!(saliency, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_of, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_tilde_of, m)?)?;
    m.add_function(wrap_pyfunction!(interaction_energy, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(fm_gap, m)?)?;
    m.add_function(wrap_pyfunction!(mixfm_gap, m)?)?;
    Ok(())
}
