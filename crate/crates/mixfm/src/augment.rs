//! Training-set augmentation: convex mixing of example pairs, saliency
//! guided neighbor selection, verbatim copying as a control, and the
//! training loop that regenerates the augmentation set every epoch.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{evaluate, EvalReport};
use crate::model::{predict, sigmoid, train_epoch, AdamState, FmParams, TrainConfig};
use crate::rng::stream;
use crate::sparse::{Dataset, LabeledExample, Provenance, SparseVector};

/// How the per-epoch augmentation set is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MixMode {
    /// No augmentation; plain training.
    #[default]
    None,
    /// Verbatim duplicates of raw examples (control condition).
    Copy,
    /// Convex combinations with a uniformly drawn partner.
    Mix,
    /// Convex combinations, best of `p` candidates by saliency.
    Saliency,
}

/// Augmentation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixConfig {
    /// First Beta shape for the mixing coefficient.
    pub alpha: f64,
    /// Second Beta shape.
    pub beta: f64,
    /// Number of augmented examples generated per epoch.
    pub n_prime: usize,
    /// Candidate neighbors scored per first parent in saliency mode.
    pub p: usize,
    pub mode: MixMode,
    /// Rank candidates by absolute saliency instead of the signed value.
    pub saliency_abs: bool,
}

impl Default for MixConfig {
    fn default() -> Self {
        MixConfig {
            alpha: 1.0,
            beta: 1.0,
            n_prime: 0,
            p: 10,
            mode: MixMode::None,
            saliency_abs: false,
        }
    }
}

impl MixConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite())
            || !(self.beta > 0.0 && self.beta.is_finite())
        {
            return Err(Error::validation(format!(
                "Beta shapes must be positive and finite, got ({}, {})",
                self.alpha, self.beta
            )));
        }
        if self.p == 0 {
            return Err(Error::validation("candidate count must be at least 1"));
        }
        Ok(())
    }
}

/// Draws the mixing coefficient: `l' ~ Beta(alpha, beta)` folded to
/// `l = max(l', 1 - l')`, so the first parent always dominates and
/// every draw lies in `[0.5, 1]`.
pub fn sample_lambda<R: Rng>(cfg: &MixConfig, rng: &mut R) -> Result<f64> {
    cfg.validate()?;
    let dist = Beta::new(cfg.alpha, cfg.beta)
        .map_err(|e| Error::validation(format!("invalid Beta parameters: {e}")))?;
    let raw = dist.sample(rng);
    let lambda = raw.max(1.0 - raw);
    assert!((0.5..=1.0).contains(&lambda), "folded draw {lambda} escaped [0.5, 1]");
    Ok(lambda)
}

/// Convex combination of two examples:
/// `x = l * a.x + (1 - l) * b.x` merged over the union of supports,
/// `y = l * a.y + (1 - l) * b.y`, flagged as mixed.
pub fn mix_pair(a: &LabeledExample, b: &LabeledExample, lambda: f64) -> Result<LabeledExample> {
    if a.x.dim() != b.x.dim() {
        return Err(Error::DimMismatch {
            expected: a.x.dim(),
            got: b.x.dim(),
        });
    }
    if !(0.5..=1.0).contains(&lambda) {
        return Err(Error::validation(format!(
            "mixing coefficient {lambda} outside [0.5, 1]"
        )));
    }
    let mu = 1.0 - lambda;
    let (ai, av) = (a.x.indices(), a.x.values());
    let (bi, bv) = (b.x.indices(), b.x.values());
    let mut indices = Vec::with_capacity(ai.len() + bi.len());
    let mut values = Vec::with_capacity(ai.len() + bi.len());
    let (mut i, mut j) = (0usize, 0usize);
    while i < ai.len() || j < bi.len() {
        let (idx, val) = match (ai.get(i), bi.get(j)) {
            (Some(&ia), Some(&ib)) if ia == ib => {
                let v = lambda * av[i] + mu * bv[j];
                i += 1;
                j += 1;
                (ia, v)
            }
            (Some(&ia), Some(&ib)) if ia < ib => {
                let v = lambda * av[i];
                i += 1;
                (ia, v)
            }
            (Some(_), Some(&ib)) => {
                let v = mu * bv[j];
                j += 1;
                (ib, v)
            }
            (Some(&ia), None) => {
                let v = lambda * av[i];
                i += 1;
                (ia, v)
            }
            (None, Some(&ib)) => {
                let v = mu * bv[j];
                j += 1;
                (ib, v)
            }
            (None, None) => unreachable!(),
        };
        if val != 0.0 {
            indices.push(idx);
            values.push(val.clamp(-1.0, 1.0));
        }
    }
    let x = SparseVector::from_sorted_unchecked(a.x.dim(), indices, values);
    let y = (lambda * a.y + mu * b.y).clamp(0.0, 1.0);
    LabeledExample::new(x, y, Provenance::Mixed)
}

/// Chooses which raw examples act as first parents this epoch.
///
/// At most `n` parents are drawn without replacement; asking for more
/// repeats the whole dataset (in order) as many times as fits and draws
/// the remainder without replacement.
pub(crate) fn first_parent_indices<R: Rng>(n: usize, n_prime: usize, rng: &mut R) -> Vec<usize> {
    let full = n_prime / n;
    let rem = n_prime % n;
    let mut out = Vec::with_capacity(n_prime);
    for _ in 0..full {
        out.extend(0..n);
    }
    out.extend(rand::seq::index::sample(rng, n, rem));
    out
}

/// Generates `n_prime` mixed examples: first parents per
/// [`first_parent_indices`], second parents uniform with replacement,
/// a fresh coefficient per pair.
pub fn generate_mix_batch<R: Rng>(data: &Dataset, cfg: &MixConfig, rng: &mut R) -> Result<Dataset> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::validation("cannot mix an empty dataset"));
    }
    let parents = first_parent_indices(data.len(), cfg.n_prime, rng);
    let mut out = Vec::with_capacity(parents.len());
    for i in parents {
        let (j, lambda) = draw_partner(data.len(), cfg, rng)?;
        out.push(mix_pair(data.get(i), data.get(j), lambda)?);
    }
    Dataset::new(data.dim(), out)
}

/// One (second parent, coefficient) draw. The draw order (index first,
/// then coefficient) is fixed: candidate-count one in saliency mode
/// must consume the stream exactly like plain mixing so the two modes
/// coincide under a shared seed.
fn draw_partner<R: Rng>(n: usize, cfg: &MixConfig, rng: &mut R) -> Result<(usize, f64)> {
    let j = rng.random_range(0..n);
    let lambda = sample_lambda(cfg, rng)?;
    Ok((j, lambda))
}

/// Saliency of one example under the current model:
/// `(sigmoid(f(x)) - y) * f(x)`, the loss slope at the score times the
/// score itself.
pub fn saliency(params: &FmParams, ex: &LabeledExample) -> Result<f64> {
    let f = predict(params, &ex.x)?;
    Ok((sigmoid(f) - ex.y) * f)
}

/// Generates `p` mixed candidates for one first parent and returns the
/// most salient (ties broken toward the earliest candidate).
pub fn select_salient_neighbor<R: Rng>(
    params: &FmParams,
    first: &LabeledExample,
    data: &Dataset,
    cfg: &MixConfig,
    rng: &mut R,
) -> Result<LabeledExample> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::validation("cannot mix an empty dataset"));
    }
    let mut best: Option<(f64, LabeledExample)> = None;
    for _ in 0..cfg.p {
        let (j, lambda) = draw_partner(data.len(), cfg, rng)?;
        let cand = mix_pair(first, data.get(j), lambda)?;
        let mut score = saliency(params, &cand)?;
        if cfg.saliency_abs {
            score = score.abs();
        }
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, cand));
        }
    }
    Ok(best.expect("p >= 1").1)
}

/// Saliency-guided counterpart of [`generate_mix_batch`]: same first
/// parents, best-of-`p` mixing per parent against a frozen model.
pub fn generate_salient_batch<R: Rng>(
    params: &FmParams,
    data: &Dataset,
    cfg: &MixConfig,
    rng: &mut R,
) -> Result<Dataset> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::validation("cannot mix an empty dataset"));
    }
    let parents = first_parent_indices(data.len(), cfg.n_prime, rng);
    let mut out = Vec::with_capacity(parents.len());
    for i in parents {
        out.push(select_salient_neighbor(params, data.get(i), data, cfg, rng)?);
    }
    Dataset::new(data.dim(), out)
}

/// Duplicates `n_prime` distinct raw examples verbatim (in dataset
/// order), flagged as copies. The control arm: any benefit over plain
/// training that survives here is explained by sample count, not by
/// mixing.
pub fn copy_augment<R: Rng>(data: &Dataset, n_prime: usize, rng: &mut R) -> Result<Dataset> {
    if n_prime > data.len() {
        return Err(Error::validation(format!(
            "cannot copy {n_prime} distinct examples out of {}",
            data.len()
        )));
    }
    let mut idxs: Vec<usize> = rand::seq::index::sample(rng, data.len(), n_prime).into_vec();
    idxs.sort_unstable();
    let out = idxs
        .into_iter()
        .map(|i| {
            let ex = data.get(i);
            LabeledExample::new(ex.x.clone(), ex.y, Provenance::Copied)
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(data.dim(), out)
}

/// One epoch's history entry. Metrics are measured on natural examples
/// only; augmented examples influence training alone.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Mean minibatch loss over the combined training set, measured
    /// before each update.
    pub train_loss: f64,
    pub train: EvalReport,
    pub valid: Option<EvalReport>,
    pub test: Option<EvalReport>,
    pub seconds: f64,
}

/// Full training loop with per-epoch augmentation.
///
/// Each epoch regenerates the augmentation set from the start-of-epoch
/// model (saliency never sees mid-epoch parameters), trains one pass
/// over raw plus augmented examples, then evaluates the provided
/// natural splits. All randomness derives from `cfg.seed` through the
/// named sub-streams `init`, `mix` and `shuffle`, so a seed pins the
/// whole run regardless of mode-specific draw counts.
pub fn train_augmented(
    data: &Dataset,
    cfg: &TrainConfig,
    mix: &MixConfig,
    valid: Option<&Dataset>,
    test: Option<&Dataset>,
) -> Result<(FmParams, Vec<EpochRecord>)> {
    cfg.validate()?;
    mix.validate()?;
    if data.is_empty() {
        return Err(Error::validation("cannot train on an empty dataset"));
    }
    let mut params = FmParams::init(data.dim(), cfg.embed_dim, &mut stream(cfg.seed, "init"))?;
    let mut state = AdamState::new(data.dim(), cfg.embed_dim, cfg.learning_rate)?;
    let mut mix_rng = stream(cfg.seed, "mix");
    let mut shuffle_rng = stream(cfg.seed, "shuffle");
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let started = Instant::now();
        let augmented = match mix.mode {
            MixMode::None => None,
            MixMode::Copy => Some(copy_augment(data, mix.n_prime, &mut mix_rng)?),
            MixMode::Mix => Some(generate_mix_batch(data, mix, &mut mix_rng)?),
            MixMode::Saliency => Some(generate_salient_batch(&params, data, mix, &mut mix_rng)?),
        };
        let combined;
        let epoch_data = match augmented {
            Some(aug) if !aug.is_empty() => {
                combined = data.concat(&aug)?;
                &combined
            }
            _ => data,
        };
        let stats = train_epoch(&mut params, &mut state, epoch_data, cfg, &mut shuffle_rng)?;
        history.push(EpochRecord {
            epoch,
            train_loss: stats.mean_loss,
            train: evaluate(&params, data)?,
            valid: valid.map(|d| evaluate(&params, d)).transpose()?,
            test: test.map(|d| evaluate(&params, d)).transpose()?,
            seconds: started.elapsed().as_secs_f64(),
        });
    }
    Ok((params, history))
}
