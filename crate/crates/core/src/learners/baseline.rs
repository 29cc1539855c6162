//! Ridge-regularized linear logistic regression, fitted by damped Newton
//! iterations. Deterministic and fast; used as the reference learner in tests
//! and Monte Carlo validity checks.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{canonical_order, sigmoid, softplus, Learner, ScoringRule};
use crate::data::{LabeledDataset, Object};
use crate::error::{Error, Result};

/// Ridge penalty per example: the objective is the mean deviance plus
/// `RIDGE_PENALTY / 2 * |w|^2` (intercept included), which is unchanged when
/// every example is duplicated.
pub const RIDGE_PENALTY: f64 = 1e-3;

const MAX_ITERATIONS: usize = 100;
const TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BaselineLogistic;

impl Learner for BaselineLogistic {
    type Rule = LogisticModel;

    fn train(
        &self,
        data: &LabeledDataset,
        indices: &[usize],
        _run: usize,
    ) -> Result<LogisticModel> {
        fit(data, indices)
    }
}

/// Trains on the whole of `train`.
pub fn train_baseline(train: &LabeledDataset) -> Result<LogisticModel> {
    let all: Vec<usize> = (0..train.len()).collect();
    fit(train, &all)
}

/// `score(x) = b + w . standardize(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    mean: Vec<f64>,
    scale: Vec<f64>,
    weights: Vec<f64>,
    intercept: f64,
}

impl LogisticModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept
            + x.iter()
                .zip(&self.mean)
                .zip(&self.scale)
                .zip(&self.weights)
                .map(|(((x, m), s), w)| w * (x - m) / s)
                .sum::<f64>()
    }
}

impl ScoringRule for LogisticModel {
    fn score(&self, object: Object<'_>) -> Result<f64> {
        if object.features.len() != self.weights.len() {
            return Err(Error::invalid(format!(
                "object has {} features, model expects {}",
                object.features.len(),
                self.weights.len()
            )));
        }
        Ok(self.predict(object.features))
    }
}

fn objective(design: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let n = y.len() as f64;
    let eta = design * beta;
    let loss: f64 = eta
        .iter()
        .zip(y.iter())
        .map(|(&e, &t)| softplus(e) - t * e)
        .sum();
    loss / n + 0.5 * RIDGE_PENALTY * beta.norm_squared()
}

fn fit(data: &LabeledDataset, indices: &[usize]) -> Result<LogisticModel> {
    data.require_binary()?;
    if indices.is_empty() {
        return Err(Error::invalid("cannot train on an empty training set"));
    }
    let rows = canonical_order(data, indices);
    let n = rows.len();
    let d = data.dim();

    let mut mean = vec![0.0; d];
    for &r in &rows {
        for (m, x) in mean.iter_mut().zip(data.features(r)) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut scale = vec![0.0; d];
    for &r in &rows {
        for ((s, x), m) in scale.iter_mut().zip(data.features(r)).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    for s in scale.iter_mut() {
        *s = (*s / n as f64).sqrt();
        if s.is_nan() || *s <= 1e-12 {
            *s = 1.0;
        }
    }

    // Column 0 is the intercept.
    let design = DMatrix::from_fn(n, d + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            (data.features(rows[i])[j - 1] - mean[j - 1]) / scale[j - 1]
        }
    });
    let y = DVector::from_iterator(n, rows.iter().map(|&r| data.label(r) as f64));
    let mut beta = DVector::zeros(d + 1);
    let mut current = objective(&design, &y, &beta);

    for _ in 0..MAX_ITERATIONS {
        let eta = &design * &beta;
        let p = eta.map(sigmoid);
        let gradient = design.tr_mul(&(&p - &y)) / n as f64 + &beta * RIDGE_PENALTY;
        let weights = p.map(|pi| pi * (1.0 - pi));
        let weighted = DMatrix::from_fn(n, d + 1, |i, j| design[(i, j)] * weights[i]);
        let mut hessian = design.tr_mul(&weighted) / n as f64;
        for k in 0..=d {
            hessian[(k, k)] += RIDGE_PENALTY;
        }
        let Some(chol) = hessian.cholesky() else {
            return Err(Error::invalid("logistic Hessian is not positive definite"));
        };
        let step = chol.solve(&gradient);

        // Backtracking keeps every iterate a descent step.
        let mut t = 1.0;
        let mut next = &beta - &step * t;
        let mut value = objective(&design, &y, &next);
        while value > current && t > 1e-10 {
            t *= 0.5;
            next = &beta - &step * t;
            value = objective(&design, &y, &next);
        }
        let moved = (&next - &beta).amax();
        beta = next;
        current = value;
        if moved < TOLERANCE {
            break;
        }
    }

    Ok(LogisticModel {
        mean,
        scale,
        weights: beta.iter().skip(1).copied().collect(),
        intercept: beta[0],
    })
}
