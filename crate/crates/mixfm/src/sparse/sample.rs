//! Negative sampling for implicit-feedback data: each observed positive
//! is paired with `k` synthetic negatives whose item slot is replaced by
//! an item the same user never interacted with.

use std::collections::{HashMap, HashSet};
use std::ops::Range;

use rand::Rng;

use crate::error::{Error, Result};
use crate::sparse::{Dataset, LabeledExample, SparseVector};

/// Expands a positive-only dataset with `k` sampled negatives per
/// positive.
///
/// `user_pool` and `item_pool` are the slot ranges of the user and item
/// one-hot blocks; every example must have exactly one active feature in
/// each. Negatives keep everything except the item slot, which moves to
/// a uniformly drawn non-interacted item, and carry label 0. The output
/// interleaves each positive with its negatives, so its order (and the
/// whole result, given a seeded `rng`) is deterministic.
///
/// A user who has interacted with the entire item pool gets no negatives
/// (logged as a warning) but keeps their positives.
pub fn negative_sample<R: Rng>(
    positives: &Dataset,
    user_pool: Range<usize>,
    item_pool: Range<usize>,
    k: usize,
    rng: &mut R,
) -> Result<Dataset> {
    if k == 0 {
        return Err(Error::validation("negatives per positive must be at least 1"));
    }
    for (name, pool) in [("user", &user_pool), ("item", &item_pool)] {
        if pool.is_empty() || pool.end > positives.dim() {
            return Err(Error::validation(format!(
                "{name} pool {pool:?} invalid for dimension {}",
                positives.dim()
            )));
        }
    }
    if user_pool.start < item_pool.end && item_pool.start < user_pool.end {
        return Err(Error::validation("user and item pools overlap"));
    }

    let keys: Vec<(u32, u32)> = positives
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            if ex.y != 1.0 {
                return Err(Error::validation(format!(
                    "example {i} has label {}; negative sampling expects positives only",
                    ex.y
                )));
            }
            let user = single_active(&ex.x, &user_pool).ok_or_else(|| {
                Error::validation(format!("example {i} lacks a unique user feature"))
            })?;
            let item = single_active(&ex.x, &item_pool).ok_or_else(|| {
                Error::validation(format!("example {i} lacks a unique item feature"))
            })?;
            Ok((user, item))
        })
        .collect::<Result<_>>()?;

    let mut interacted: HashMap<u32, HashSet<u32>> = HashMap::new();
    for &(user, item) in &keys {
        interacted.entry(user).or_default().insert(item);
    }

    let pool_len = item_pool.len();
    let mut warned: HashSet<u32> = HashSet::new();
    let mut out = Vec::with_capacity(positives.len() * (k + 1));
    for (ex, &(user, item)) in positives.iter().zip(&keys) {
        out.push(ex.clone());
        let seen = &interacted[&user];
        if seen.len() >= pool_len {
            if warned.insert(user) {
                log::warn!("user feature {user} has interacted with every item; skipping negatives");
            }
            continue;
        }
        let item_value = ex.x.get(item);
        for _ in 0..k {
            let drawn = draw_unseen(&item_pool, seen, rng);
            out.push(LabeledExample::new(
                replace_item(&ex.x, item, drawn, item_value),
                0.0,
                ex.provenance,
            )?);
        }
    }
    Dataset::new(positives.dim(), out)
}

/// Uniform draw from `pool` excluding `seen`. Rejection sampling while
/// the pool is mostly unseen; falls back to materializing the complement
/// when more than half the pool is excluded.
fn draw_unseen<R: Rng>(pool: &Range<usize>, seen: &HashSet<u32>, rng: &mut R) -> u32 {
    if seen.len() * 2 < pool.len() {
        loop {
            let cand = rng.random_range(pool.start..pool.end) as u32;
            if !seen.contains(&cand) {
                return cand;
            }
        }
    } else {
        let unseen: Vec<u32> = pool
            .clone()
            .map(|i| i as u32)
            .filter(|i| !seen.contains(i))
            .collect();
        unseen[rng.random_range(0..unseen.len())]
    }
}

fn single_active(x: &SparseVector, pool: &Range<usize>) -> Option<u32> {
    let mut found = None;
    for (i, _) in x.iter() {
        if pool.contains(&(i as usize)) {
            if found.is_some() {
                return None;
            }
            found = Some(i);
        }
    }
    found
}

fn replace_item(x: &SparseVector, old: u32, new: u32, value: f64) -> SparseVector {
    let mut entries: Vec<(u32, f64)> = x.iter().filter(|&(i, _)| i != old).collect();
    entries.push((new, value));
    entries.sort_by_key(|&(i, _)| i);
    let (indices, values) = entries.into_iter().unzip();
    SparseVector::from_sorted_unchecked(x.dim(), indices, values)
}
