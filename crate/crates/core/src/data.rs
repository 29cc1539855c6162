//! Labeled datasets and seeded train/test splitting.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{seeded, Stream};

/// A label, encoded as an index into the dataset's ordered label alphabet.
///
/// Binary problems use `0` for the negative class (`email` in Spambase) and
/// `1` for the positive class (`spam`).
pub type Label = usize;

/// One owned `(object, label)` pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub features: Vec<f64>,
    pub label: Label,
}

impl Example {
    pub fn new(features: Vec<f64>, label: Label) -> Self {
        Self { features, label }
    }
}

/// A borrowed test or calibration object.
///
/// `row` is the example's identity: its row index in the file (or
/// generator output) it originally came from. External score tables are keyed
/// by it; built-in learners only look at `features`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Object<'a> {
    pub row: usize,
    pub features: &'a [f64],
}

/// An ordered sequence of examples with a fixed dimensionality and label
/// alphabet `{0, .., n_labels - 1}`.
///
/// Features are stored row-major in one buffer. Every example also carries its
/// original row identifier, which survives shuffling and subsetting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    features: Vec<f64>,
    labels: Vec<Label>,
    rows: Vec<usize>,
    dim: usize,
    n_labels: usize,
}

impl LabeledDataset {
    /// Builds a dataset whose row identifiers are `0..examples.len()`.
    pub fn new(examples: Vec<Example>, n_labels: usize) -> Result<Self> {
        let dim = examples.first().map(|e| e.features.len()).unwrap_or(0);
        let mut features = Vec::with_capacity(examples.len() * dim);
        let mut labels = Vec::with_capacity(examples.len());
        for (i, ex) in examples.into_iter().enumerate() {
            if ex.features.len() != dim {
                return Err(Error::Validation(format!(
                    "example {i} has {} features, expected {dim}",
                    ex.features.len()
                )));
            }
            features.extend_from_slice(&ex.features);
            labels.push(ex.label);
        }
        let rows = (0..labels.len()).collect();
        Self::from_parts(features, dim, labels, rows, n_labels)
    }

    /// Builds a dataset from a row-major feature buffer.
    pub fn from_parts(
        features: Vec<f64>,
        dim: usize,
        labels: Vec<Label>,
        rows: Vec<usize>,
        n_labels: usize,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Validation("dataset has no examples".into()));
        }
        if dim == 0 {
            return Err(Error::Validation("dimensionality must be positive".into()));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::Validation(format!(
                "feature buffer holds {} values, expected {} x {dim}",
                features.len(),
                labels.len()
            )));
        }
        if rows.len() != labels.len() {
            return Err(Error::Validation(
                "one row identifier per example required".into(),
            ));
        }
        if n_labels == 0 {
            return Err(Error::Validation("label alphabet is empty".into()));
        }
        if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= n_labels) {
            return Err(Error::Validation(format!(
                "example {i} has label {y}, outside the alphabet 0..{n_labels}"
            )));
        }
        Ok(Self {
            features,
            labels,
            rows,
            dim,
            n_labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn features(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn row_id(&self, i: usize) -> usize {
        self.rows[i]
    }

    pub fn object(&self, i: usize) -> Object<'_> {
        Object {
            row: self.rows[i],
            features: self.features(i),
        }
    }

    pub fn example(&self, i: usize) -> Example {
        Example::new(self.features(i).to_vec(), self.labels[i])
    }

    /// Number of examples carrying each label.
    pub fn label_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_labels];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// The examples at `indices`, in that order, keeping row identifiers.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.dim);
        let mut labels = Vec::with_capacity(indices.len());
        let mut rows = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.features(i));
            labels.push(self.labels[i]);
            rows.push(self.rows[i]);
        }
        Self {
            features,
            labels,
            rows,
            dim: self.dim,
            n_labels: self.n_labels,
        }
    }

    pub(crate) fn require_binary(&self) -> Result<()> {
        if self.n_labels != 2 {
            return Err(Error::invalid(format!(
                "binary labels required, dataset alphabet has {} labels",
                self.n_labels
            )));
        }
        Ok(())
    }
}

/// Shuffles the dataset with `seed` and cuts it into a training part of
/// `train_size` examples and a test part holding the rest.
pub fn shuffle_and_split(
    dataset: &LabeledDataset,
    train_size: usize,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let l = dataset.len();
    if train_size == 0 || train_size >= l {
        return Err(Error::invalid(format!(
            "train_size must lie in 1..{l}, got {train_size}"
        )));
    }
    let mut order: Vec<usize> = (0..l).collect();
    order.shuffle(&mut seeded(seed, Stream::DataSplit, 0));
    Ok((
        dataset.subset(&order[..train_size]),
        dataset.subset(&order[train_size..]),
    ))
}

/// Like [`shuffle_and_split`], but keeps each label's share of the training
/// part as close as possible to its share of the whole dataset.
///
/// Not used by the default experiment protocol.
pub fn shuffle_and_split_stratified(
    dataset: &LabeledDataset,
    train_size: usize,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let l = dataset.len();
    if train_size == 0 || train_size >= l {
        return Err(Error::invalid(format!(
            "train_size must lie in 1..{l}, got {train_size}"
        )));
    }
    let mut rng = seeded(seed, Stream::DataSplit, 1);
    let mut by_label: Vec<Vec<usize>> = vec![Vec::new(); dataset.n_labels()];
    for i in 0..l {
        by_label[dataset.label(i)].push(i);
    }
    // Largest-remainder allocation of train_size across labels.
    let mut quotas: Vec<(usize, f64)> = by_label
        .iter()
        .map(|g| {
            let exact = g.len() as f64 * train_size as f64 / l as f64;
            (exact.floor() as usize, exact - exact.floor())
        })
        .collect();
    let mut short = train_size - quotas.iter().map(|q| q.0).sum::<usize>();
    let mut by_remainder: Vec<usize> = (0..quotas.len()).collect();
    by_remainder.sort_by(|&a, &b| quotas[b].1.total_cmp(&quotas[a].1).then(a.cmp(&b)));
    for &g in by_remainder.iter().cycle() {
        if short == 0 {
            break;
        }
        if quotas[g].0 < by_label[g].len() {
            quotas[g].0 += 1;
            short -= 1;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (group, (quota, _)) in by_label.iter_mut().zip(&quotas) {
        group.shuffle(&mut rng);
        train.extend_from_slice(&group[..*quota]);
        test.extend_from_slice(&group[*quota..]);
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> LabeledDataset {
        let examples = (0..n)
            .map(|i| Example::new(vec![i as f64, (i * i) as f64], i % 2))
            .collect();
        LabeledDataset::new(examples, 2).unwrap()
    }

    #[test]
    fn rejects_ragged_and_out_of_alphabet() {
        let ragged = vec![Example::new(vec![1.0], 0), Example::new(vec![1.0, 2.0], 1)];
        assert!(LabeledDataset::new(ragged, 2).is_err());
        let bad_label = vec![Example::new(vec![1.0], 0), Example::new(vec![1.0], 2)];
        assert!(LabeledDataset::new(bad_label, 2).is_err());
        assert!(LabeledDataset::new(vec![], 2).is_err());
    }

    #[test]
    fn split_sizes() {
        let d = toy(4601);
        let (train, test) = shuffle_and_split(&d, 3600, 0).unwrap();
        assert_eq!((train.len(), test.len()), (3600, 1001));

        let (a, b) = shuffle_and_split(&toy(2), 1, 123).unwrap();
        assert_eq!((a.len(), b.len()), (1, 1));
    }

    #[test]
    fn split_is_deterministic_and_seed_dependent() {
        let d = toy(50);
        let first = shuffle_and_split(&d, 30, 5).unwrap();
        assert_eq!(first, shuffle_and_split(&d, 30, 5).unwrap());
        assert_ne!(first, shuffle_and_split(&d, 30, 6).unwrap());
    }

    #[test]
    fn split_rejects_bad_train_size() {
        let d = toy(10);
        for bad in [0, 10, 11] {
            assert!(matches!(
                shuffle_and_split(&d, bad, 0),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn split_keeps_row_identity() {
        let d = toy(20);
        let (train, test) = shuffle_and_split(&d, 12, 1).unwrap();
        for part in [&train, &test] {
            for i in 0..part.len() {
                let row = part.row_id(i);
                assert_eq!(part.features(i), d.features(row));
                assert_eq!(part.label(i), d.label(row));
            }
        }
    }

    #[test]
    fn stratified_split_balances_labels() {
        let examples = (0..100)
            .map(|i| Example::new(vec![i as f64], usize::from(i < 30)))
            .collect();
        let d = LabeledDataset::new(examples, 2).unwrap();
        let (train, test) = shuffle_and_split_stratified(&d, 50, 3).unwrap();
        assert_eq!(train.label_counts(), vec![35, 15]);
        assert_eq!(test.label_counts(), vec![35, 15]);
    }
}
