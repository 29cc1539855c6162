//! Gradient boosting with binomial deviance (MART / TreeBoost).
//!
//! The model starts from the training base-rate log-odds. Each round computes
//! the negative deviance gradient `y - p` on a (possibly bagged) subsample,
//! grows a least-squares regression tree on it, and replaces every leaf value
//! with the one-step Newton estimate `sum(y - p) / sum(p (1 - p))` over the
//! in-bag examples of the leaf. Leaf values are scaled by the shrinkage
//! before being added to the running score.
//!
//! Split search is exact and greedy over the midpoints between consecutive
//! distinct feature values. Features are scanned in increasing index order and
//! thresholds in increasing order; a candidate replaces the incumbent only if
//! its gain is strictly larger, so ties go to the lowest feature, then the
//! lowest threshold.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{canonical_order, sigmoid, softplus, Learner, ScoringRule};
use crate::data::{LabeledDataset, Object};
use crate::error::{Error, Result};
use crate::rng::{seeded, Stream};

/// Bound applied to the initial and every cumulative log-odds score.
pub const LOG_ODDS_CLAMP: f64 = 15.0;

fn clamp(f: f64) -> f64 {
    f.clamp(-LOG_ODDS_CLAMP, LOG_ODDS_CLAMP)
}

/// Per-example binomial deviance in the `log(1 + e^f) - y f` convention
/// (half of minus twice the log-likelihood, so the negative gradient is
/// exactly `y - p`).
pub fn binomial_deviance(y: f64, f: f64) -> f64 {
    softplus(f) - y * f
}

/// `-d/df binomial_deviance(y, f) = y - 1 / (1 + exp(-f))`.
pub fn deviance_negative_gradient(y: f64, f: f64) -> f64 {
    y - sigmoid(f)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostingConfig {
    pub num_trees: usize,
    pub shrinkage: f64,
    /// Maximum tree depth; `1` grows stumps.
    pub interaction_depth: usize,
    /// Fraction of the training set drawn (without replacement) for each tree.
    pub bag_fraction: f64,
    pub rng_seed: u64,
    /// A split is admissible only if both children keep this many in-bag
    /// examples.
    pub min_leaf_size: usize,
}

impl Default for BoostingConfig {
    fn default() -> Self {
        Self {
            num_trees: 500,
            shrinkage: 0.1,
            interaction_depth: 1,
            bag_fraction: 1.0,
            rng_seed: 0,
            min_leaf_size: 10,
        }
    }
}

impl BoostingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return Err(Error::invalid(format!(
                "shrinkage must lie in (0, 1], got {}",
                self.shrinkage
            )));
        }
        if self.interaction_depth == 0 {
            return Err(Error::invalid("interaction depth must be positive"));
        }
        if !(self.bag_fraction > 0.0 && self.bag_fraction <= 1.0) {
            return Err(Error::invalid(format!(
                "bag fraction must lie in (0, 1], got {}",
                self.bag_fraction
            )));
        }
        if self.min_leaf_size == 0 {
            return Err(Error::invalid("minimum leaf size must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// A regression tree; the root is node 0. `x[feature] <= threshold` goes left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// A trained boosted model; its score is the clamped cumulative log-odds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    init: f64,
    trees: Vec<Tree>,
    dim: usize,
}

impl BoostedModel {
    pub fn num_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn initial_score(&self) -> f64 {
        self.init
    }

    /// Score using only the first `trees` trees.
    pub fn predict_staged(&self, x: &[f64], trees: usize) -> f64 {
        self.trees[..trees.min(self.trees.len())]
            .iter()
            .fold(self.init, |f, t| clamp(f + t.predict(x)))
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        self.predict_staged(x, self.trees.len())
    }
}

impl ScoringRule for BoostedModel {
    fn score(&self, object: Object<'_>) -> Result<f64> {
        if object.features.len() != self.dim {
            return Err(Error::invalid(format!(
                "object has {} features, model expects {}",
                object.features.len(),
                self.dim
            )));
        }
        Ok(self.predict(object.features))
    }
}

/// Learner wrapper for [`train_boosted_stumps`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoostedStumps {
    pub config: BoostingConfig,
}

impl BoostedStumps {
    pub fn new(config: BoostingConfig) -> Self {
        Self { config }
    }
}

impl Learner for BoostedStumps {
    type Rule = BoostedModel;

    fn train(&self, data: &LabeledDataset, indices: &[usize], run: usize) -> Result<BoostedModel> {
        fit(data, indices, &self.config, run as u64)
    }
}

/// Trains on the whole of `train`.
pub fn train_boosted_stumps(
    train: &LabeledDataset,
    config: &BoostingConfig,
) -> Result<BoostedModel> {
    let all: Vec<usize> = (0..train.len()).collect();
    fit(train, &all, config, 0)
}

const NO_NODE: u32 = u32::MAX;

/// Column-major copy of the training rows with per-feature sort orders.
struct Columns {
    values: Vec<Vec<f64>>,
    sorted: Vec<Vec<u32>>,
}

impl Columns {
    fn new(data: &LabeledDataset, rows: &[usize]) -> Self {
        let values: Vec<Vec<f64>> = (0..data.dim())
            .map(|j| rows.iter().map(|&r| data.features(r)[j]).collect())
            .collect();
        let sorted = values
            .iter()
            .map(|col| {
                let mut order: Vec<u32> = (0..col.len() as u32).collect();
                order.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
                order
            })
            .collect();
        Self { values, sorted }
    }

    fn row(&self, i: usize, buf: &mut [f64]) {
        for (j, col) in self.values.iter().enumerate() {
            buf[j] = col[i];
        }
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

fn fit(
    data: &LabeledDataset,
    indices: &[usize],
    config: &BoostingConfig,
    run: u64,
) -> Result<BoostedModel> {
    config.validate()?;
    data.require_binary()?;
    if indices.is_empty() {
        return Err(Error::invalid("cannot train on an empty training set"));
    }
    let rows = canonical_order(data, indices);
    let n = rows.len();
    let y: Vec<f64> = rows.iter().map(|&r| data.label(r) as f64).collect();
    let positives = y.iter().sum::<f64>();
    let init = clamp((positives / (n as f64 - positives)).ln());

    let cols = Columns::new(data, &rows);
    let mut f = vec![init; n];
    let mut trees = Vec::with_capacity(config.num_trees);
    let mut rng = seeded(config.rng_seed, Stream::Boosting, run);
    let bag_size = ((n as f64 * config.bag_fraction).floor() as usize).max(1);
    let mut node_of = vec![0u32; n];
    let mut residual = vec![0.0; n];
    let mut row_buf = vec![0.0; data.dim()];

    for _ in 0..config.num_trees {
        if bag_size < n {
            node_of.fill(NO_NODE);
            for i in index::sample(&mut rng, n, bag_size) {
                node_of[i] = 0;
            }
        } else {
            node_of.fill(0);
        }
        for i in 0..n {
            residual[i] = deviance_negative_gradient(y[i], f[i]);
        }
        let tree = grow_tree(&cols, &residual, &f, &mut node_of, config);
        for (i, fi) in f.iter_mut().enumerate() {
            cols.row(i, &mut row_buf);
            *fi = clamp(*fi + tree.predict(&row_buf));
        }
        trees.push(tree);
    }
    Ok(BoostedModel {
        init,
        trees,
        dim: data.dim(),
    })
}

/// Grows one tree level by level. `node_of[i]` holds the current node of
/// in-bag row `i` (or `NO_NODE`) and is overwritten.
fn grow_tree(
    cols: &Columns,
    residual: &[f64],
    f: &[f64],
    node_of: &mut [u32],
    config: &BoostingConfig,
) -> Tree {
    let mut nodes = vec![Node::Leaf(0.0)];
    let mut frontier: Vec<usize> = vec![0];

    for _ in 0..config.interaction_depth {
        if frontier.is_empty() {
            break;
        }
        // Per-node totals for the frontier.
        let slot_of = |node: u32| frontier.iter().position(|&x| x as u32 == node);
        let m = frontier.len();
        let mut total = vec![0.0; m];
        let mut total_sq = vec![0.0; m];
        let mut count = vec![0usize; m];
        let mut slot = vec![usize::MAX; node_of.len()];
        for (i, &nd) in node_of.iter().enumerate() {
            if nd == NO_NODE {
                continue;
            }
            if let Some(s) = slot_of(nd) {
                slot[i] = s;
                total[s] += residual[i];
                total_sq[s] += residual[i] * residual[i];
                count[s] += 1;
            }
        }
        let mut best: Vec<Option<Candidate>> = vec![None; m];
        let mut left_sum = vec![0.0; m];
        let mut left_count = vec![0usize; m];
        let mut last = vec![f64::NAN; m];
        for (feature, order) in cols.sorted.iter().enumerate() {
            let col = &cols.values[feature];
            left_sum.fill(0.0);
            left_count.fill(0);
            for &i in order {
                let i = i as usize;
                let s = slot[i];
                if s == usize::MAX {
                    continue;
                }
                let x = col[i];
                let nl = left_count[s];
                if nl > 0 && x > last[s] {
                    let nr = count[s] - nl;
                    if nl >= config.min_leaf_size && nr >= config.min_leaf_size {
                        let sl = left_sum[s];
                        let sr = total[s] - sl;
                        let gain = sl * sl / nl as f64 + sr * sr / nr as f64
                            - total[s] * total[s] / count[s] as f64;
                        if best[s].is_none_or(|b| gain > b.gain) {
                            let mut threshold = 0.5 * (last[s] + x);
                            if threshold >= x {
                                threshold = last[s];
                            }
                            best[s] = Some(Candidate {
                                gain,
                                feature,
                                threshold,
                            });
                        }
                    }
                }
                left_sum[s] += residual[i];
                left_count[s] += 1;
                last[s] = x;
            }
        }

        let mut next = Vec::new();
        let mut children = vec![None; m];
        for (s, &node) in frontier.iter().enumerate() {
            // Gains at rounding-noise level are not real improvements.
            let Some(c) = best[s].filter(|c| c.gain > 1e-12 * total_sq[s]) else {
                continue;
            };
            let left = nodes.len();
            nodes.push(Node::Leaf(0.0));
            nodes.push(Node::Leaf(0.0));
            nodes[node] = Node::Split {
                feature: c.feature,
                threshold: c.threshold,
                left,
                right: left + 1,
            };
            children[s] = Some((c.feature, c.threshold, left));
            next.push(left);
            next.push(left + 1);
        }
        for (i, nd) in node_of.iter_mut().enumerate() {
            let s = slot[i];
            if s == usize::MAX {
                continue;
            }
            if let Some((feature, threshold, left)) = children[s] {
                let go_left = cols.values[feature][i] <= threshold;
                *nd = if go_left {
                    left as u32
                } else {
                    left as u32 + 1
                };
            }
        }
        frontier = next;
    }

    // Newton leaf values over the in-bag rows of each leaf.
    let mut num = vec![0.0; nodes.len()];
    let mut den = vec![0.0; nodes.len()];
    for (i, &nd) in node_of.iter().enumerate() {
        if nd == NO_NODE {
            continue;
        }
        let p = sigmoid(f[i]);
        num[nd as usize] += residual[i];
        den[nd as usize] += p * (1.0 - p);
    }
    for (k, node) in nodes.iter_mut().enumerate() {
        if let Node::Leaf(v) = node {
            *v = if den[k] > 0.0 {
                config.shrinkage * num[k] / den[k].max(1e-12)
            } else {
                0.0
            };
        }
    }
    Tree { nodes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Example;
    use rand::Rng;

    fn dataset(points: &[(f64, usize)]) -> LabeledDataset {
        LabeledDataset::new(
            points
                .iter()
                .map(|&(x, y)| Example::new(vec![x], y))
                .collect(),
            2,
        )
        .unwrap()
    }

    #[test]
    fn zero_trees_gives_base_rate_log_odds() {
        let data = dataset(&[(0.1, 1), (0.2, 1), (0.3, 0), (0.4, 1)]);
        let config = BoostingConfig {
            num_trees: 0,
            ..Default::default()
        };
        let model = train_boosted_stumps(&data, &config).unwrap();
        for x in [-5.0, 0.0, 0.25, 9.0] {
            assert!((model.predict(&[x]) - 3f64.ln()).abs() < 1e-15);
        }
        assert!((3f64.ln() - 1.0986).abs() < 1e-4);
    }

    #[test]
    fn single_label_training_is_clamped_and_constant() {
        for label in [0, 1] {
            let data = dataset(&[(0.0, label), (1.0, label), (2.0, label), (3.0, label)]);
            let config = BoostingConfig {
                num_trees: 20,
                min_leaf_size: 1,
                ..Default::default()
            };
            let model = train_boosted_stumps(&data, &config).unwrap();
            let expected = if label == 1 {
                LOG_ODDS_CLAMP
            } else {
                -LOG_ODDS_CLAMP
            };
            for x in [-1.0, 0.5, 2.5, 10.0] {
                assert_eq!(model.predict(&[x]), expected);
            }
        }
    }

    #[test]
    fn separable_data_is_separated() {
        let points: Vec<(f64, usize)> = (-20..20)
            .map(|i| (i as f64 / 4.0 + 0.1, usize::from(i >= 0)))
            .collect();
        let data = dataset(&points);
        let config = BoostingConfig {
            num_trees: 50,
            min_leaf_size: 1,
            ..Default::default()
        };
        let model = train_boosted_stumps(&data, &config).unwrap();
        for &(x, y) in &points {
            let s = model.predict(&[x]);
            assert_eq!(s > 0.0, y == 1, "x={x} score={s}");
        }
    }

    #[test]
    fn empty_training_set_is_rejected() {
        let data = dataset(&[(0.0, 0), (1.0, 1)]);
        let err = BoostedStumps::default().train(&data, &[], 0).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn bad_config_is_rejected() {
        let data = dataset(&[(0.0, 0), (1.0, 1)]);
        for config in [
            BoostingConfig {
                shrinkage: 0.0,
                ..Default::default()
            },
            BoostingConfig {
                shrinkage: 1.5,
                ..Default::default()
            },
            BoostingConfig {
                bag_fraction: 0.0,
                ..Default::default()
            },
            BoostingConfig {
                interaction_depth: 0,
                ..Default::default()
            },
        ] {
            assert!(train_boosted_stumps(&data, &config).is_err());
        }
    }

    fn noisy(seed: u64, n: usize, dim: usize) -> LabeledDataset {
        let mut rng = seeded(seed, Stream::Synthetic, 99);
        let examples = (0..n)
            .map(|_| {
                let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                let p = sigmoid(2.0 * x[0] - x[1 % dim]);
                Example::new(x, usize::from(rng.random::<f64>() < p))
            })
            .collect();
        LabeledDataset::new(examples, 2).unwrap()
    }

    #[test]
    fn deeper_trees_and_bagging_are_deterministic() {
        let data = noisy(3, 200, 3);
        let config = BoostingConfig {
            num_trees: 30,
            interaction_depth: 3,
            bag_fraction: 0.5,
            rng_seed: 11,
            ..Default::default()
        };
        let a = train_boosted_stumps(&data, &config).unwrap();
        let b = train_boosted_stumps(&data, &config).unwrap();
        assert_eq!(a, b);
        let c = train_boosted_stumps(
            &data,
            &BoostingConfig {
                rng_seed: 12,
                ..config
            },
        )
        .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn more_trees_never_increase_training_deviance() {
        for seed in 0..5 {
            let data = noisy(seed, 150, 4);
            let config = BoostingConfig {
                num_trees: 100,
                min_leaf_size: 5,
                ..Default::default()
            };
            let model = train_boosted_stumps(&data, &config).unwrap();
            let deviance = |t: usize| -> f64 {
                (0..data.len())
                    .map(|i| {
                        binomial_deviance(
                            data.label(i) as f64,
                            model.predict_staged(data.features(i), t),
                        )
                    })
                    .sum()
            };
            let mut prev = deviance(0);
            for t in 1..=100 {
                let d = deviance(t);
                assert!(
                    d <= prev + 1e-12 * prev,
                    "seed {seed}: tree {t} raised deviance {prev} -> {d}"
                );
                prev = d;
            }
        }
    }

    #[test]
    fn training_order_does_not_matter() {
        let data = noisy(8, 120, 3);
        let forward: Vec<usize> = (0..data.len()).collect();
        let backward: Vec<usize> = forward.iter().rev().copied().collect();
        let learner = BoostedStumps::new(BoostingConfig {
            num_trees: 40,
            ..Default::default()
        });
        assert_eq!(
            learner.train(&data, &forward, 0).unwrap(),
            learner.train(&data, &backward, 0).unwrap()
        );
    }
}
