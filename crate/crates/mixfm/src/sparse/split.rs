//! Random train/valid/test partitioning.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::sparse::Dataset;

/// Splits a dataset into disjoint train/valid/test parts.
///
/// Ratios must be positive and sum to 1 within 1e-9. Sizes follow a
/// largest-remainder allocation, so each is within one of `n * ratio`
/// and they always sum to `n`. The permutation comes entirely from
/// `rng`, making the partition reproducible under a fixed seed.
pub fn split_dataset<R: Rng>(
    data: &Dataset,
    ratios: (f64, f64, f64),
    rng: &mut R,
) -> Result<(Dataset, Dataset, Dataset)> {
    let (a, b, c) = ratios;
    if !(a > 0.0 && b > 0.0 && c > 0.0) {
        return Err(Error::validation(format!("ratios must be positive, got {ratios:?}")));
    }
    if (a + b + c - 1.0).abs() > 1e-9 {
        return Err(Error::validation(format!(
            "ratios must sum to 1, got {}",
            a + b + c
        )));
    }
    let n = data.len();
    if n < 3 {
        return Err(Error::validation(format!(
            "need at least 3 examples to split, got {n}"
        )));
    }

    let sizes = largest_remainder(n, [a, b, c]);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut parts = order.iter().map(|&i| data.get(i).clone());
    let train: Vec<_> = parts.by_ref().take(sizes[0]).collect();
    let valid: Vec<_> = parts.by_ref().take(sizes[1]).collect();
    let test: Vec<_> = parts.collect();
    Ok((
        Dataset::new(data.dim(), train)?,
        Dataset::new(data.dim(), valid)?,
        Dataset::new(data.dim(), test)?,
    ))
}

/// Integer apportionment: floor every quota, then hand leftover units to
/// the largest fractional remainders (ties to the earlier part).
fn largest_remainder(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let quotas: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut sizes: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&i, &j| {
        let ri = quotas[i] - quotas[i].floor();
        let rj = quotas[j] - quotas[j].floor();
        rj.partial_cmp(&ri).unwrap().then(i.cmp(&j))
    });
    for &i in order.iter().take(n - assigned) {
        sizes[i] += 1;
    }
    [sizes[0], sizes[1], sizes[2]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::sparse::{LabeledExample, SparseVector};

    fn data(n: usize) -> Dataset {
        let exs = (0..n)
            .map(|i| {
                let x = SparseVector::new(n, vec![(i as u32, 1.0)]).unwrap();
                LabeledExample::natural(x, (i % 2) as f64).unwrap()
            })
            .collect();
        Dataset::new(n, exs).unwrap()
    }

    #[test]
    fn ten_examples_split_8_1_1() {
        let d = data(10);
        let (tr, va, te) = split_dataset(&d, (0.8, 0.1, 0.1), &mut stream(1, "split")).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (8, 1, 1));
    }

    #[test]
    fn partition_is_disjoint_and_complete() {
        let d = data(23);
        let (tr, va, te) = split_dataset(&d, (0.8, 0.1, 0.1), &mut stream(4, "split")).unwrap();
        assert_eq!(tr.len() + va.len() + te.len(), 23);
        let mut seen: Vec<u32> = tr
            .iter()
            .chain(va.iter())
            .chain(te.iter())
            .map(|ex| ex.x.indices()[0])
            .collect();
        seen.sort_unstable();
        let expect: Vec<u32> = (0..23).collect();
        assert_eq!(seen, expect);
    }

    #[test]
    fn sizes_within_one_of_quota() {
        for n in [3usize, 7, 10, 99, 1000] {
            let sizes = largest_remainder(n, [0.8, 0.1, 0.1]);
            assert_eq!(sizes.iter().sum::<usize>(), n);
            for (s, r) in sizes.iter().zip([0.8, 0.1, 0.1]) {
                assert!((*s as f64 - r * n as f64).abs() < 1.0 + 1e-12);
            }
        }
    }

    #[test]
    fn same_seed_same_partition() {
        let d = data(50);
        let a = split_dataset(&d, (0.8, 0.1, 0.1), &mut stream(9, "split")).unwrap();
        let b = split_dataset(&d, (0.8, 0.1, 0.1), &mut stream(9, "split")).unwrap();
        assert_eq!(a, b);
        let c = split_dataset(&d, (0.8, 0.1, 0.1), &mut stream(10, "split")).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn bad_ratios_rejected() {
        let d = data(10);
        let mut rng = stream(1, "split");
        assert!(split_dataset(&d, (0.5, 0.5, 0.1), &mut rng).is_err());
        assert!(split_dataset(&d, (1.0, 0.0, 0.0), &mut rng).is_err());
        assert!(split_dataset(&data(2), (0.8, 0.1, 0.1), &mut rng).is_err());
    }
}
