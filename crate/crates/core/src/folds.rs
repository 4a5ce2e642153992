//! Stratified k-fold partitioning.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
    /// False when some stratum had fewer members than folds and the plan fell
    /// back to a plain shuffled partition.
    pub stratified: bool,
}

/// Splits `0..strata.len()` into `n_folds` test folds. Items sharing a stratum
/// key are spread evenly over the folds; overall fold sizes differ by at most
/// one. Deterministic for a given `seed`.
pub fn make_folds<K: Ord>(strata: &[K], n_folds: usize, seed: u64) -> Result<FoldPlan> {
    let n = strata.len();
    if n_folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 folds, got {n_folds}"
        )));
    }
    if n < n_folds {
        return Err(Error::TooFewVectors {
            required: n_folds,
            available: n,
        });
    }
    let mut rng = crate::seed::rng(seed);

    let mut groups: BTreeMap<&K, Vec<usize>> = BTreeMap::new();
    for (i, k) in strata.iter().enumerate() {
        groups.entry(k).or_default().push(i);
    }
    let stratified = groups.values().all(|g| g.len() >= n_folds);

    let mut order: Vec<usize> = Vec::with_capacity(n);
    if stratified {
        for g in groups.values_mut() {
            g.shuffle(&mut rng);
            order.extend_from_slice(g);
        }
    } else {
        order.extend(0..n);
        order.shuffle(&mut rng);
    }

    // dealing the concatenated strata round-robin keeps both the per-stratum
    // and the overall fold sizes within one of each other
    let mut fold_of = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        fold_of[i] = pos % n_folds;
    }
    let folds = (0..n_folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| fold_of[i] == f);
            Fold { train, test }
        })
        .collect();
    Ok(FoldPlan { folds, stratified })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_two_class_five_folds() {
        let labels = [0, 1, 0, 1, 0, 1, 0, 1, 0, 1];
        let plan = make_folds(&labels, 5, 3).unwrap();
        assert!(plan.stratified);
        for f in &plan.folds {
            assert_eq!(f.test.len(), 2);
            assert_eq!(f.test.iter().filter(|&&i| labels[i] == 0).count(), 1);
            assert_eq!(f.train.len(), 8);
        }
    }

    #[test]
    fn partition_and_sizes() {
        let labels: Vec<u8> = (0..10662).map(|i| (i % 2) as u8).collect();
        let plan = make_folds(&labels, 10, 11).unwrap();
        let sizes: Vec<usize> = plan.folds.iter().map(|f| f.test.len()).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut seen = vec![0u8; labels.len()];
        for f in &plan.folds {
            for &i in &f.test {
                seen[i] += 1;
            }
            assert_eq!(f.train.len() + f.test.len(), labels.len());
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn deterministic_per_seed() {
        let labels: Vec<u8> = (0..50).map(|i| (i % 3) as u8).collect();
        assert_eq!(
            make_folds(&labels, 5, 1).unwrap(),
            make_folds(&labels, 5, 1).unwrap()
        );
        assert_ne!(
            make_folds(&labels, 5, 1).unwrap(),
            make_folds(&labels, 5, 2).unwrap()
        );
    }

    #[test]
    fn small_class_falls_back() {
        let labels = [0, 0, 0, 0, 0, 0, 1];
        let plan = make_folds(&labels, 3, 0).unwrap();
        assert!(!plan.stratified);
        assert_eq!(plan.folds.iter().map(|f| f.test.len()).sum::<usize>(), 7);
    }

    #[test]
    fn bad_parameters() {
        assert!(make_folds(&[0, 1, 2], 1, 0).is_err());
        assert!(make_folds(&[0, 1], 3, 0).is_err());
    }
}
