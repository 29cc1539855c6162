//! Index partitions: the two-part ICP split and K-fold assignments.
//!
//! Indices are 0-based positions into the training set. Each part is stored in
//! increasing order.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{seeded, Stream};

/// A partition of `0..num_indices` into `K >= 2` non-empty folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPartition {
    num_indices: usize,
    folds: Vec<Vec<usize>>,
    seed: u64,
}

impl FoldPartition {
    /// Validates an explicit fold assignment. Fold sizes may be arbitrary here;
    /// only [`make_folds`] promises near-equal sizes.
    pub fn from_folds(num_indices: usize, mut folds: Vec<Vec<usize>>, seed: u64) -> Result<Self> {
        if folds.len() < 2 {
            return Err(Error::invalid(format!(
                "at least 2 folds required, got {}",
                folds.len()
            )));
        }
        let mut seen = vec![false; num_indices];
        for (k, fold) in folds.iter_mut().enumerate() {
            if fold.is_empty() {
                return Err(Error::invalid(format!("fold {k} is empty")));
            }
            fold.sort_unstable();
            for &i in fold.iter() {
                if i >= num_indices || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::invalid(format!(
                        "index {i} is out of range or assigned twice"
                    )));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!(
                "index {i} is not assigned to a fold"
            )));
        }
        Ok(Self {
            num_indices,
            folds,
            seed,
        })
    }

    pub fn num_indices(&self) -> usize {
        self.num_indices
    }

    pub fn num_folds(&self) -> usize {
        self.folds.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fold(&self, k: usize) -> &[usize] {
        &self.folds[k]
    }

    pub fn folds(&self) -> &[Vec<usize>] {
        &self.folds
    }

    /// All indices outside fold `k`, in increasing order.
    pub fn complement(&self, k: usize) -> Vec<usize> {
        let mut in_fold = vec![false; self.num_indices];
        for &i in &self.folds[k] {
            in_fold[i] = true;
        }
        (0..self.num_indices).filter(|&i| !in_fold[i]).collect()
    }

    /// True when all folds have the same size.
    pub fn is_balanced(&self) -> bool {
        self.folds.iter().all(|f| f.len() == self.folds[0].len())
    }
}

/// Shuffles `0..l` with `seed` and deals the result round-robin into `k` folds,
/// so fold sizes differ by at most one.
pub fn make_folds(l: usize, k: usize, seed: u64) -> Result<FoldPartition> {
    if k < 2 || k > l {
        return Err(Error::invalid(format!(
            "number of folds must lie in 2..={l}, got {k}"
        )));
    }
    let mut order: Vec<usize> = (0..l).collect();
    order.shuffle(&mut seeded(seed, Stream::Folds, k as u64));
    let mut folds = vec![Vec::with_capacity(l / k + 1); k];
    for (pos, i) in order.into_iter().enumerate() {
        folds[pos % k].push(i);
    }
    FoldPartition::from_folds(l, folds, seed)
}

/// The ICP split into a proper training set `T` and a calibration set `C`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPartition {
    num_indices: usize,
    proper_training: Vec<usize>,
    calibration: Vec<usize>,
    seed: u64,
}

impl SplitPartition {
    pub fn new(
        num_indices: usize,
        mut proper_training: Vec<usize>,
        mut calibration: Vec<usize>,
        seed: u64,
    ) -> Result<Self> {
        if proper_training.is_empty() || calibration.is_empty() {
            return Err(Error::invalid(
                "proper training and calibration sets must both be non-empty",
            ));
        }
        proper_training.sort_unstable();
        calibration.sort_unstable();
        let folds = FoldPartition::from_folds(
            num_indices,
            vec![proper_training.clone(), calibration.clone()],
            seed,
        );
        folds.map(|_| Self {
            num_indices,
            proper_training,
            calibration,
            seed,
        })
    }

    pub fn num_indices(&self) -> usize {
        self.num_indices
    }

    pub fn proper_training(&self) -> &[usize] {
        &self.proper_training
    }

    pub fn calibration(&self) -> &[usize] {
        &self.calibration
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Size of the proper training set for `l` examples split in proportion
/// `a : b`: `l * a / (a + b)` rounded to nearest (halves up), then clamped to
/// `1..=l-1`.
pub fn proper_training_size(l: usize, (a, b): (usize, usize)) -> usize {
    let total = a + b;
    let rounded = (2 * l * a + total) / (2 * total);
    rounded.clamp(1, l.saturating_sub(1).max(1))
}

/// Randomly splits `0..l` into proper training and calibration sets in
/// proportion `ratio = (a, b)`. The default protocol uses `(2, 1)`.
pub fn make_split(l: usize, ratio: (usize, usize), seed: u64) -> Result<SplitPartition> {
    if l < 2 {
        return Err(Error::invalid(format!(
            "at least 2 examples needed to split, got {l}"
        )));
    }
    if ratio.0 == 0 || ratio.1 == 0 {
        return Err(Error::invalid(format!(
            "split ratio parts must be positive, got {}:{}",
            ratio.0, ratio.1
        )));
    }
    let t = proper_training_size(l, ratio);
    let mut order: Vec<usize> = (0..l).collect();
    order.shuffle(&mut seeded(seed, Stream::IcpSplit, 0));
    let calibration = order.split_off(t);
    SplitPartition::new(l, order, calibration, seed)
}
