//! Trainable prediction rules producing real-valued scores.
//!
//! For binary problems every score is a log-odds estimate
//! `log P(1 | x) / P(0 | x)`, which is what [`crate::conformal::LogitDelta`]
//! turns into conformity scores.

mod baseline;
mod boosting;
mod external;

use std::cmp::Ordering;
use std::sync::Arc;

pub use baseline::{train_baseline, BaselineLogistic, LogisticModel, RIDGE_PENALTY};
pub use boosting::{
    binomial_deviance, deviance_negative_gradient, train_boosted_stumps, BoostedModel,
    BoostedStumps, BoostingConfig, LOG_ODDS_CLAMP,
};
pub use external::{external_scores, ExternalScores, ScoreTable};

use crate::data::{LabeledDataset, Object};
use crate::error::Result;

/// A trained prediction rule `f: X -> R`.
pub trait ScoringRule: Send + Sync {
    fn score(&self, object: Object<'_>) -> Result<f64>;
}

impl<R: ScoringRule + ?Sized> ScoringRule for Box<R> {
    fn score(&self, object: Object<'_>) -> Result<f64> {
        (**self).score(object)
    }
}

impl<R: ScoringRule + ?Sized> ScoringRule for Arc<R> {
    fn score(&self, object: Object<'_>) -> Result<f64> {
        (**self).score(object)
    }
}

/// A training procedure for scoring rules.
pub trait Learner: Send + Sync {
    type Rule: ScoringRule;

    /// Trains on the examples of `data` at `indices`.
    ///
    /// `run` numbers the training runs of one predictor: the fold index for
    /// cross-conformal predictors, `0` for an inductive predictor. Randomized
    /// learners derive their random stream from it, and external score tables
    /// use it to pick the table for that fold.
    fn train(&self, data: &LabeledDataset, indices: &[usize], run: usize) -> Result<Self::Rule>;
}

impl<L: Learner + ?Sized> Learner for &L {
    type Rule = L::Rule;

    fn train(&self, data: &LabeledDataset, indices: &[usize], run: usize) -> Result<Self::Rule> {
        (**self).train(data, indices, run)
    }
}

/// Sorts training indices by `(label, features)` so that learners see the same
/// sequence whatever order the proper training set was given in.
pub(crate) fn canonical_order(data: &LabeledDataset, indices: &[usize]) -> Vec<usize> {
    let mut order = indices.to_vec();
    order.sort_by(|&a, &b| {
        data.label(a).cmp(&data.label(b)).then_with(|| {
            data.features(a)
                .iter()
                .zip(data.features(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
    order
}

/// Numerically stable logistic function.
pub(crate) fn sigmoid(f: f64) -> f64 {
    if f >= 0.0 {
        1.0 / (1.0 + (-f).exp())
    } else {
        let e = f.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(f))` without overflow.
pub(crate) fn softplus(f: f64) -> f64 {
    if f > 0.0 {
        f + (-f).exp().ln_1p()
    } else {
        f.exp().ln_1p()
    }
}
