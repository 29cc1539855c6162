//! Calibration curves, per-seed efficiency statistics, and Monte Carlo
//! validity checks.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Example, Label, LabeledDataset, Object};
use crate::error::{Error, Result};
use crate::pvalue::PValueMap;
use crate::rng::{seeded, Stream};

/// `0.00, 0.01, ..., 1.00`.
pub fn full_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}

/// `0.000, 0.002, ..., 0.100`: the low-significance corner of a calibration
/// plot.
pub fn corner_grid() -> Vec<f64> {
    (0..=50).map(|i| i as f64 / 500.0).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("significance grid is empty"));
    }
    if grid.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(Error::invalid("significance levels must lie in [0, 1]"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(
            "significance grid must be strictly increasing",
        ));
    }
    Ok(())
}

/// Fraction of test objects whose true label falls outside the prediction set,
/// per significance level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCurve {
    pub grid: Vec<f64>,
    pub error_rate: Vec<f64>,
}

impl CalibrationCurve {
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid
            .iter()
            .copied()
            .zip(self.error_rate.iter().copied())
    }

    /// `max |error_rate(eps) - eps|` over grid points with `eps <= upto`.
    pub fn max_deviation(&self, upto: f64) -> f64 {
        self.points()
            .filter(|&(e, _)| e <= upto)
            .map(|(e, r)| (r - e).abs())
            .fold(0.0, f64::max)
    }

    /// Error rate at the grid point closest to `epsilon`.
    pub fn error_at(&self, epsilon: f64) -> f64 {
        let i = self
            .grid
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - epsilon).abs().total_cmp(&(b.1 - epsilon).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        self.error_rate[i]
    }
}

/// The true label is an error at `epsilon` exactly when `p^true <= epsilon`,
/// i.e. when it is not in `{y : p^y > epsilon}`. The grid may include the
/// endpoints 0 and 1.
pub fn calibration_curve(results: &[(PValueMap, Label)], grid: &[f64]) -> Result<CalibrationCurve> {
    if results.is_empty() {
        return Err(Error::invalid("no test results to evaluate"));
    }
    check_grid(grid)?;
    let mut true_p: Vec<f64> = results
        .iter()
        .map(|(p, y)| {
            if *y >= p.n_labels() {
                Err(Error::invalid(format!(
                    "true label {y} outside the p-value map"
                )))
            } else {
                Ok(p.value(*y))
            }
        })
        .collect::<Result<_>>()?;
    true_p.sort_by(f64::total_cmp);
    let n = true_p.len() as f64;
    let error_rate = grid
        .iter()
        .map(|&e| true_p.partition_point(|&p| p <= e) as f64 / n)
        .collect();
    Ok(CalibrationCurve {
        grid: grid.to_vec(),
        error_rate,
    })
}

/// One seed's results for one method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub mean_confidence: f64,
    pub mean_credibility: f64,
    pub curve: CalibrationCurve,
}

impl SeedReport {
    /// Means are taken over every test object.
    pub fn from_results(seed: u64, results: &[(PValueMap, Label)], grid: &[f64]) -> Result<Self> {
        let curve = calibration_curve(results, grid)?;
        let (mut conf, mut cred) = (0.0, 0.0);
        for (p, _) in results {
            let cc = p.confidence_credibility()?;
            conf += cc.confidence;
            cred += cc.credibility;
        }
        let n = results.len() as f64;
        Ok(Self {
            seed,
            mean_confidence: conf / n,
            mean_credibility: cred / n,
            curve,
        })
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n - 1` denominator); `None` below two values.
pub fn sample_std_dev(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

/// Across-seed statistics for one method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub reports: Vec<SeedReport>,
    pub average_confidence: f64,
    pub average_credibility: f64,
    /// Absent with fewer than two seeds.
    pub std_dev_confidence: Option<f64>,
    pub std_dev_credibility: Option<f64>,
}

impl MethodSummary {
    /// Accepts a single seed and then leaves the standard deviations empty.
    pub fn new(method: impl Into<String>, mut reports: Vec<SeedReport>) -> Result<Self> {
        if reports.is_empty() {
            return Err(Error::invalid("no seed reports to summarize"));
        }
        reports.sort_by_key(|r| r.seed);
        let conf: Vec<f64> = reports.iter().map(|r| r.mean_confidence).collect();
        let cred: Vec<f64> = reports.iter().map(|r| r.mean_credibility).collect();
        Ok(Self {
            method: method.into(),
            average_confidence: mean(&conf),
            average_credibility: mean(&cred),
            std_dev_confidence: sample_std_dev(&conf),
            std_dev_credibility: sample_std_dev(&cred),
            reports,
        })
    }
}

/// Average and sample standard deviation of the per-seed mean confidence and
/// credibility. Needs at least two seeds.
pub fn summarize(method: impl Into<String>, reports: Vec<SeedReport>) -> Result<MethodSummary> {
    if reports.len() < 2 {
        return Err(Error::invalid(format!(
            "standard deviation needs at least 2 seeds, got {}",
            reports.len()
        )));
    }
    MethodSummary::new(method, reports)
}

/// One row group per method.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub rows: Vec<MethodSummary>,
}

impl SummaryTable {
    pub fn get(&self, method: &str) -> Option<&MethodSummary> {
        self.rows.iter().find(|r| r.method == method)
    }
}

/// Two Gaussian classes with identity covariance whose means are `separation`
/// apart along the diagonal direction, plus symmetric label noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticGenerator {
    pub dim: usize,
    pub separation: f64,
    /// Probability of flipping each label after drawing the features.
    pub label_noise: f64,
    /// Probability of class 1.
    pub positive_rate: f64,
}

impl SyntheticGenerator {
    pub fn new(dim: usize, separation: f64, label_noise: f64) -> Self {
        Self {
            dim,
            separation,
            label_noise,
            positive_rate: 0.5,
        }
    }

    /// Labels independent of the features.
    pub fn pure_noise(dim: usize) -> Self {
        Self::new(dim, 0.0, 0.0)
    }

    pub fn with_positive_rate(mut self, rate: f64) -> Self {
        self.positive_rate = rate;
        self
    }

    /// True when every draw is the same point with the same label.
    pub fn is_degenerate(&self) -> bool {
        self.dim == 0
            || ((self.positive_rate == 0.0 || self.positive_rate == 1.0)
                && (self.label_noise == 0.0 || self.label_noise == 1.0)
                && self.separation == 0.0)
    }

    pub fn sample(&self, n: usize, seed: u64) -> LabeledDataset {
        let mut rng = seeded(seed, Stream::Synthetic, 0);
        let shift = self.separation / (2.0 * (self.dim as f64).sqrt());
        let examples = (0..n)
            .map(|_| {
                let class = usize::from(rng.random::<f64>() < self.positive_rate);
                let sign = if class == 1 { 1.0 } else { -1.0 };
                let features = (0..self.dim)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        z + sign * shift
                    })
                    .collect();
                let flip = rng.random::<f64>() < self.label_noise;
                Example::new(features, if flip { 1 - class } else { class })
            })
            .collect();
        LabeledDataset::new(examples, 2).expect("generator output is well formed")
    }
}

/// Empirical error rates of a set predictor over independent trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub trials: usize,
    pub grid: Vec<f64>,
    pub error_rate: Vec<f64>,
    /// Binomial standard error `sqrt(r (1 - r) / trials)` of each rate.
    pub std_error: Vec<f64>,
    pub warnings: Vec<String>,
}

impl ValidityReport {
    /// `eps + z * sqrt(eps (1 - eps) / trials)`: the largest error rate
    /// consistent with validity at `z` standard errors.
    pub fn upper_band(&self, epsilon: f64, z: f64) -> f64 {
        epsilon + z * (epsilon * (1.0 - epsilon) / self.trials as f64).sqrt()
    }
}

/// Runs `trials` independent experiments. Trial `t` draws `train_size + 1`
/// fresh examples with seed derived from `(seed, t)`; the last one is the test
/// example. `predict(train, test_object, trial_seed)` returns its p-values and
/// an error at `eps` is recorded when `p^true <= eps`.
///
/// Trials run in parallel; the result is identical to a sequential run.
pub fn validity_mc<F>(
    predict: F,
    generator: &SyntheticGenerator,
    train_size: usize,
    trials: usize,
    grid: &[f64],
    seed: u64,
) -> Result<ValidityReport>
where
    F: Fn(&LabeledDataset, Object<'_>, u64) -> Result<PValueMap> + Sync,
{
    if trials == 0 {
        return Err(Error::invalid("at least one trial required"));
    }
    if train_size < 2 {
        return Err(Error::invalid("training set must have at least 2 examples"));
    }
    check_grid(grid)?;
    let mut warnings = Vec::new();
    if generator.is_degenerate() {
        warnings.push("generator is degenerate: every draw is the same example".to_string());
        log::warn!("{}", warnings[0]);
    }

    let outcome: Vec<(Vec<u64>, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial_seed = {
                use rand::RngCore;
                seeded(seed, Stream::Trial, t as u64).next_u64()
            };
            let sample = generator.sample(train_size + 1, trial_seed);
            let train_idx: Vec<usize> = (0..train_size).collect();
            let train = sample.subset(&train_idx);
            let single_label = train.label_counts().iter().filter(|&&c| c > 0).count() < 2;
            let p = predict(&train, sample.object(train_size), trial_seed)
                .map_err(|e| e.context(format!("trial {t}")))?;
            let p_true = p.value(sample.label(train_size));
            let errors = grid.iter().map(|&e| u64::from(p_true <= e)).collect();
            Ok((errors, single_label))
        })
        .collect::<Result<_>>()?;

    let mut counts = vec![0u64; grid.len()];
    let mut single_label = 0usize;
    for (errors, single) in &outcome {
        for (c, e) in counts.iter_mut().zip(errors) {
            *c += e;
        }
        single_label += usize::from(*single);
    }
    if single_label > 0 {
        warnings.push(format!(
            "{single_label} of {trials} training sets had a single label"
        ));
    }
    let n = trials as f64;
    let error_rate: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let std_error = error_rate
        .iter()
        .map(|r| (r * (1.0 - r) / n).sqrt())
        .collect();
    Ok(ValidityReport {
        trials,
        grid: grid.to_vec(),
        error_rate,
        std_error,
        warnings,
    })
}

/// A fraction formatted as a percentage with `decimals` places.
pub fn percent(value: f64, decimals: usize) -> String {
    format!("{:.*}%", decimals, value * 100.0)
}
