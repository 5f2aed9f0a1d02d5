//! Evaluation: AUC, LogLoss, and a paired t-test for comparing repeated
//! runs of two training methods.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{logistic_loss, predict, FmParams};
use crate::sparse::Dataset;
use crate::special::student_t_two_sided_p;

/// Metrics of one model on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub auc: f64,
    pub logloss: f64,
    pub n_examples: usize,
    pub n_positive: usize,
}

/// Area under the ROC curve by rank statistics in `O(n log n)`.
///
/// Equals the probability that a random positive outscores a random
/// negative, with ties counted half. Requires at least one example of
/// each class.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::validation(format!(
            "scores ({}) and labels ({}) differ in length",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("scores".into()));
    }
    let n = scores.len();
    let n_pos = labels.iter().filter(|l| **l).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::validation(
            "AUC needs at least one positive and one negative example",
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| scores[i].partial_cmp(&scores[j]).expect("no NaN"));

    // Walk tied groups, assigning every member the group's mean rank.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] {
                rank_sum_pos += midrank;
            }
        }
        i = j;
    }
    let n_pos_f = n_pos as f64;
    Ok((rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

/// Mean logistic loss of raw scores against labels in `[0, 1]`.
pub fn logloss(scores: &[f64], labels: &[f64]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::validation(format!(
            "scores ({}) and labels ({}) differ in length",
            scores.len(),
            labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(Error::validation("cannot compute logloss of an empty list"));
    }
    let mut total = 0.0;
    for (s, y) in scores.iter().zip(labels) {
        if !(0.0..=1.0).contains(y) {
            return Err(Error::validation(format!("label {y} outside [0, 1]")));
        }
        total += logistic_loss(*s, *y);
    }
    Ok(total / scores.len() as f64)
}

/// Outcome of a paired t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TTest {
    /// Every pair differed by the same constant, so there is no
    /// variance to test against. `mean_diff` of zero means the inputs
    /// were elementwise identical.
    Degenerate { mean_diff: f64 },
    /// A proper test with `n - 1` degrees of freedom.
    Significance { t: f64, p: f64, df: f64 },
}

impl TTest {
    /// Two-sided p-value, absent in the degenerate case.
    pub fn p_value(&self) -> Option<f64> {
        match self {
            TTest::Degenerate { .. } => None,
            TTest::Significance { p, .. } => Some(*p),
        }
    }

    /// Whether the difference clears `alpha`. A degenerate nonzero
    /// constant difference counts as significant (it is deterministic);
    /// identical inputs never do.
    pub fn is_significant(&self, alpha: f64) -> bool {
        match self {
            TTest::Degenerate { mean_diff } => *mean_diff != 0.0,
            TTest::Significance { p, .. } => *p < alpha,
        }
    }
}

/// Paired t-test of `a` against `b`:
/// `t = mean(a - b) / (sd(a - b) / sqrt(n))` with the two-sided p-value
/// from Student's t with `n - 1` degrees of freedom. Zero-variance
/// differences yield [`TTest::Degenerate`].
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::validation("paired t-test needs at least 2 pairs"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("paired differences".into()));
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n as f64 - 1.0);
    if var == 0.0 {
        return Ok(TTest::Degenerate { mean_diff: mean });
    }
    let t = mean / (var.sqrt() / (n as f64).sqrt());
    let df = (n - 1) as f64;
    let p = student_t_two_sided_p(t, df)?;
    Ok(TTest::Significance { t, p, df })
}

/// Scores a dataset with a model and reports AUC and LogLoss.
///
/// The dataset must carry hard 0/1 labels (evaluation always runs on
/// natural examples).
pub fn evaluate(params: &FmParams, data: &Dataset) -> Result<EvalReport> {
    if data.is_empty() {
        return Err(Error::validation("cannot evaluate on an empty dataset"));
    }
    let mut scores = Vec::with_capacity(data.len());
    let mut hard = Vec::with_capacity(data.len());
    let mut soft = Vec::with_capacity(data.len());
    for ex in data.iter() {
        if ex.y != 0.0 && ex.y != 1.0 {
            return Err(Error::validation(format!(
                "evaluation labels must be 0 or 1, found {}",
                ex.y
            )));
        }
        scores.push(predict(params, &ex.x)?);
        hard.push(ex.y == 1.0);
        soft.push(ex.y);
    }
    Ok(EvalReport {
        auc: auc(&scores, &hard)?,
        logloss: logloss(&scores, &soft)?,
        n_examples: data.len(),
        n_positive: hard.iter().filter(|b| **b).count(),
    })
}
