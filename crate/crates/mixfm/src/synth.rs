//! Synthetic sparse datasets with planted non-co-occurring feature
//! pairs.
//!
//! Examples are field-structured one-hot vectors: one active feature
//! per field, value 1.0. Labels are Bernoulli draws from a recorded
//! generating model: a smooth factorization-machine score plus, for a
//! handful of "blocked" cross-field feature pairs, a direct score
//! offset whenever both features fire together. Blocked pairs never
//! co-occur in train or valid examples and are forced into a fraction
//! of test examples, so the training data carries no direct evidence
//! about their joint effect; the offset sits outside the smooth
//! low-rank structure on purpose, so it cannot be triangulated from
//! the pairs that are observed either.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{predict, sigmoid, FmParams};
use crate::rng::stream;
use crate::sparse::{Dataset, LabeledExample, SparseVector};

/// Generator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Total examples across all three splits.
    pub n: usize,
    /// Fields per example; also the number of active features.
    pub fields: usize,
    /// Features per field; total dimension is `fields * field_size`.
    pub field_size: usize,
    /// Number of planted blocked pairs.
    pub n_blocked: usize,
    /// Fraction of test examples forced to activate a blocked pair.
    pub test_pair_fraction: f64,
    /// Train/valid/test ratios, summing to 1.
    pub ratios: (f64, f64, f64),
    pub seed: u64,
    /// Embedding width of the generating model.
    pub truth_embed_dim: usize,
    /// Score offset a jointly active blocked pair adds to the
    /// generating model.
    pub pair_boost: f64,
    /// Standard deviation of generating linear weights.
    pub linear_sigma: f64,
    /// Standard deviation of generating embedding entries.
    pub embed_sigma: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n: 5000,
            fields: 5,
            field_size: 40,
            n_blocked: 5,
            test_pair_fraction: 0.5,
            ratios: (0.7, 0.1, 0.2),
            seed: 42,
            truth_embed_dim: 4,
            pair_boost: 3.0,
            linear_sigma: 0.6,
            embed_sigma: 0.1,
        }
    }
}

impl SynthSpec {
    pub fn dim(&self) -> usize {
        self.fields * self.field_size
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 10 {
            return Err(Error::validation("need at least 10 examples"));
        }
        if self.fields < 2 {
            return Err(Error::validation("need at least 2 fields to form pairs"));
        }
        if self.field_size == 0 {
            return Err(Error::validation("field_size must be positive"));
        }
        if self.n_blocked > 0 && self.field_size < 2 {
            return Err(Error::validation(
                "blocking is infeasible with a single feature per field",
            ));
        }
        if 2 * self.n_blocked > self.dim() {
            return Err(Error::validation(format!(
                "{} blocked pairs need {} distinct features but only {} exist",
                self.n_blocked,
                2 * self.n_blocked,
                self.dim()
            )));
        }
        if !(0.0..=1.0).contains(&self.test_pair_fraction) {
            return Err(Error::validation("test_pair_fraction must lie in [0, 1]"));
        }
        let (a, b, c) = self.ratios;
        if !(a > 0.0 && b > 0.0 && c > 0.0 && (a + b + c - 1.0).abs() < 1e-9) {
            return Err(Error::validation("ratios must be positive and sum to 1"));
        }
        if self.truth_embed_dim == 0 {
            return Err(Error::validation("truth_embed_dim must be positive"));
        }
        if !(self.pair_boost.is_finite()
            && self.linear_sigma.is_finite()
            && self.linear_sigma >= 0.0
            && self.embed_sigma.is_finite()
            && self.embed_sigma > 0.0)
        {
            return Err(Error::validation("invalid generating-model scales"));
        }
        Ok(())
    }
}

/// One planted pair: two features in distinct fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockedPair {
    pub feature_a: u32,
    pub feature_b: u32,
}

/// The generating model and layout, recorded alongside the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub dim: usize,
    pub fields: usize,
    pub field_size: usize,
    pub blocked_pairs: Vec<BlockedPair>,
    /// Joint score offset of each blocked pair, additional to the
    /// smooth model below.
    pub pair_boost: f64,
    pub embed_dim: usize,
    pub w0: f64,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    /// Fraction of positive labels over all generated examples.
    pub base_rate: f64,
    /// Squared embedding norm of the generating model.
    pub gamma: f64,
    pub seed: u64,
}

impl SynthTruth {
    /// The smooth part of the generating model, without the blocked
    /// pairs' joint offsets.
    pub fn params(&self) -> Result<FmParams> {
        FmParams::new(self.dim, self.embed_dim, self.w0, self.w.clone(), self.v.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub train: Dataset,
    pub valid: Dataset,
    pub test: Dataset,
    pub truth: SynthTruth,
}

struct PairSlots {
    field_a: usize,
    slot_a: usize,
    field_b: usize,
    slot_b: usize,
}

fn activates(slots: &[usize], pair: &PairSlots) -> bool {
    slots[pair.field_a] == pair.slot_a && slots[pair.field_b] == pair.slot_b
}

/// Generates the three splits plus the recorded ground truth.
pub fn generate(spec: &SynthSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let m = spec.dim();
    let mut rng = stream(spec.seed, "synth");

    let pairs = plant_pairs(spec, &mut rng)?;
    let params = plant_model(spec, &mut rng)?;
    let params = center_model(spec, params, &pairs, &mut rng)?;

    let (n_train, n_valid, n_test) = split_counts(spec.n, spec.ratios);
    let n_forced = (spec.test_pair_fraction * n_test as f64).round() as usize;

    let mut positives = 0usize;
    let train = clean_examples(spec, &pairs, &params, n_train, &mut rng, &mut positives)?;
    let valid = clean_examples(spec, &pairs, &params, n_valid, &mut rng, &mut positives)?;
    let mut test = Vec::with_capacity(n_test);
    for i in 0..n_forced {
        let pair = &pairs[i % pairs.len()];
        let mut slots = clean_slots(spec, &pairs, &mut rng)?;
        slots[pair.field_a] = pair.slot_a;
        slots[pair.field_b] = pair.slot_b;
        test.push(draw_example(spec, &pairs, &params, &slots, &mut rng, &mut positives)?);
    }
    test.extend(clean_examples(spec, &pairs, &params, n_test - n_forced, &mut rng, &mut positives)?);

    let base_rate = positives as f64 / spec.n as f64;
    let truth = SynthTruth {
        dim: m,
        fields: spec.fields,
        field_size: spec.field_size,
        blocked_pairs: pairs
            .iter()
            .map(|p| BlockedPair {
                feature_a: (p.field_a * spec.field_size + p.slot_a) as u32,
                feature_b: (p.field_b * spec.field_size + p.slot_b) as u32,
            })
            .collect(),
        pair_boost: spec.pair_boost,
        embed_dim: spec.truth_embed_dim,
        w0: params.w0(),
        w: params.w().to_vec(),
        v: params.v().to_vec(),
        base_rate,
        gamma: crate::theory::gamma_of(&params),
        seed: spec.seed,
    };
    Ok(SynthOutput {
        train: Dataset::new(m, train)?,
        valid: Dataset::new(m, valid)?,
        test: Dataset::new(m, test)?,
        truth,
    })
}

fn draw_example<R: Rng>(
    spec: &SynthSpec,
    pairs: &[PairSlots],
    params: &FmParams,
    slots: &[usize],
    rng: &mut R,
    positives: &mut usize,
) -> Result<LabeledExample> {
    let x = slots_to_sparse(spec.dim(), spec.field_size, slots);
    let joint = pairs.iter().filter(|p| activates(slots, p)).count() as f64;
    let p = sigmoid(predict(params, &x)? + spec.pair_boost * joint);
    let y = if rng.random_bool(p) { 1.0 } else { 0.0 };
    if y == 1.0 {
        *positives += 1;
    }
    LabeledExample::natural(x, y)
}

fn clean_examples<R: Rng>(
    spec: &SynthSpec,
    pairs: &[PairSlots],
    params: &FmParams,
    n: usize,
    rng: &mut R,
    positives: &mut usize,
) -> Result<Vec<LabeledExample>> {
    (0..n)
        .map(|_| {
            let slots = clean_slots(spec, pairs, rng)?;
            draw_example(spec, pairs, params, &slots, rng, positives)
        })
        .collect()
}

fn plant_pairs<R: Rng>(spec: &SynthSpec, rng: &mut R) -> Result<Vec<PairSlots>> {
    let mut used = vec![false; spec.dim()];
    let mut pairs = Vec::with_capacity(spec.n_blocked);
    let mut attempts = 0usize;
    while pairs.len() < spec.n_blocked {
        attempts += 1;
        if attempts > 10_000 {
            return Err(Error::validation("could not place the requested blocked pairs"));
        }
        let field_a = rng.random_range(0..spec.fields);
        let field_b = rng.random_range(0..spec.fields);
        if field_a == field_b {
            continue;
        }
        let slot_a = rng.random_range(0..spec.field_size);
        let slot_b = rng.random_range(0..spec.field_size);
        let fa = field_a * spec.field_size + slot_a;
        let fb = field_b * spec.field_size + slot_b;
        if used[fa] || used[fb] {
            continue;
        }
        used[fa] = true;
        used[fb] = true;
        pairs.push(PairSlots { field_a, slot_a, field_b, slot_b });
    }
    Ok(pairs)
}

fn plant_model<R: Rng>(spec: &SynthSpec, rng: &mut R) -> Result<FmParams> {
    let m = spec.dim();
    let d = spec.truth_embed_dim;
    let linear = Normal::new(0.0, spec.linear_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::validation(e.to_string()))?;
    let embed = Normal::new(0.0, spec.embed_sigma).map_err(|e| Error::validation(e.to_string()))?;
    let w: Vec<f64> = (0..m).map(|_| linear.sample(rng)).collect();
    let v: Vec<f64> = (0..m * d).map(|_| embed.sample(rng)).collect();
    FmParams::new(m, d, 0.0, w, v)
}

/// Shifts the bias so scores are centered over the clean distribution,
/// keeping the base rate near one half.
fn center_model<R: Rng>(
    spec: &SynthSpec,
    params: FmParams,
    pairs: &[PairSlots],
    rng: &mut R,
) -> Result<FmParams> {
    let probes = 512;
    let mut total = 0.0;
    for _ in 0..probes {
        let slots = clean_slots(spec, pairs, rng)?;
        let x = slots_to_sparse(spec.dim(), spec.field_size, &slots);
        total += predict(&params, &x)?;
    }
    let mean = total / probes as f64;
    FmParams::new(
        params.dim(),
        params.embed_dim(),
        -mean,
        params.w().to_vec(),
        params.v().to_vec(),
    )
}

/// Draws one slot per field, rejecting any draw that activates a
/// blocked pair.
fn clean_slots<R: Rng>(spec: &SynthSpec, pairs: &[PairSlots], rng: &mut R) -> Result<Vec<usize>> {
    for _ in 0..10_000 {
        let slots: Vec<usize> =
            (0..spec.fields).map(|_| rng.random_range(0..spec.field_size)).collect();
        if !pairs.iter().any(|p| activates(&slots, p)) {
            return Ok(slots);
        }
    }
    Err(Error::validation(
        "blocked pairs leave no admissible examples; spec is infeasible",
    ))
}

fn slots_to_sparse(m: usize, field_size: usize, slots: &[usize]) -> SparseVector {
    let indices: Vec<u32> =
        slots.iter().enumerate().map(|(f, s)| (f * field_size + s) as u32).collect();
    let values = vec![1.0; slots.len()];
    SparseVector::from_sorted_unchecked(m, indices, values)
}

fn split_counts(n: usize, (a, b, _): (f64, f64, f64)) -> (usize, usize, usize) {
    let n_train = (a * n as f64).round() as usize;
    let n_valid = (b * n as f64).round() as usize;
    let n_train = n_train.min(n - 2);
    let n_valid = n_valid.min(n - n_train - 1);
    (n_train, n_valid, n - n_train - n_valid)
}
