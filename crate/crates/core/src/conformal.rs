//! Inductive conformity measures and the three set predictors built on them.
//!
//! * [`Icp`]: one rule trained on the proper training set `T`; p-values rank
//!   the test score among the calibration scores of `C`:
//!   `p^y = (|{i in C : a_i <= a^y}| + 1) / (|C| + 1)`.
//! * [`Ccp`]: one rule per fold `k`, trained on every other fold; rank counts
//!   of all folds are pooled:
//!   `p^y = (sum_k |{i in S_k : a_{i,k} <= a^y_k}| + 1) / (l + 1)`.
//!   [`Ccp::naive_pvalues`] instead combines the per-fold p-values
//!   `(|{i in S_k : a_{i,k} <= a^y_k}| + 1) / (|S_k| + 1)` with Fisher's
//!   method.
//!
//! Comparisons are non-strict: calibration scores equal to the test score
//! count toward the p-value. There is no randomized tie-breaking.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Label, LabeledDataset, Object};
use crate::error::{Error, Result};
use crate::fisher::fisher_combine;
use crate::learners::{Learner, ScoringRule};
use crate::partition::{FoldPartition, SplitPartition};
use crate::pvalue::{PValue, PValueMap, Rational};

/// `A(proper training set, example)`.
///
/// `fit` does all the work that depends on the proper training set and
/// returns a rule; `score` then evaluates single examples against it. Built-in
/// measures do not depend on the order of the proper training set.
pub trait ConformityMeasure: Send + Sync {
    type Rule: Send + Sync;

    /// `run` is the fold index for cross-conformal predictors, `0` otherwise.
    fn fit(&self, data: &LabeledDataset, proper: &[usize], run: usize) -> Result<Self::Rule>;

    fn score(&self, rule: &Self::Rule, object: Object<'_>, label: Label) -> Result<f64>;

    /// Scores of `object` under every label in `0..n_labels`.
    fn score_labels(
        &self,
        rule: &Self::Rule,
        object: Object<'_>,
        n_labels: usize,
    ) -> Result<Vec<f64>> {
        (0..n_labels).map(|y| self.score(rule, object, y)).collect()
    }
}

/// `A(z_T, (x, y)) = f(x)` if `y = 1` and `-f(x)` if `y = 0`, where `f` is the
/// log-odds rule a learner fits on the proper training set.
#[derive(Clone, Debug, Default)]
pub struct LogitDelta<L> {
    learner: L,
}

impl<L> LogitDelta<L> {
    pub fn new(learner: L) -> Self {
        Self { learner }
    }

    pub fn learner(&self) -> &L {
        &self.learner
    }
}

/// `Delta(y, f) = f` for `y = 1`, `-f` for `y = 0`.
pub fn logit_delta(label: Label, log_odds: f64) -> f64 {
    if label == 1 {
        log_odds
    } else {
        -log_odds
    }
}

impl<L: Learner> ConformityMeasure for LogitDelta<L> {
    type Rule = L::Rule;

    fn fit(&self, data: &LabeledDataset, proper: &[usize], run: usize) -> Result<L::Rule> {
        data.require_binary()?;
        self.learner.train(data, proper, run)
    }

    fn score(&self, rule: &L::Rule, object: Object<'_>, label: Label) -> Result<f64> {
        if label > 1 {
            return Err(Error::invalid(format!("label {label} is not binary")));
        }
        Ok(logit_delta(label, rule.score(object)?))
    }

    fn score_labels(
        &self,
        rule: &L::Rule,
        object: Object<'_>,
        n_labels: usize,
    ) -> Result<Vec<f64>> {
        if n_labels != 2 {
            return Err(Error::invalid("LogitDelta needs a binary label alphabet"));
        }
        let f = rule.score(object)?;
        Ok(vec![logit_delta(0, f), logit_delta(1, f)])
    }
}

/// Conformity scores behind one p-value computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConformityScores {
    /// `a_i` for the calibration examples, in calibration-set order.
    pub calibration_scores: Vec<f64>,
    /// `a^y` for each candidate label `y`.
    pub test_scores: Vec<f64>,
}

/// `|{i : scores_i <= alpha}|` by direct enumeration.
pub fn count_at_most(scores: &[f64], alpha: f64) -> usize {
    scores.iter().filter(|&&s| s <= alpha).count()
}

/// `(|{i : scores_i <= alpha}| + 1) / (|scores| + 1)`: the p-value of a test
/// score against one calibration set (an ICP calibration set or one CCP fold).
pub fn fold_pvalue(scores: &[f64], alpha: f64) -> Result<PValue> {
    if scores.is_empty() {
        return Err(Error::invalid("calibration set is empty"));
    }
    Ok(PValue::from_rank(
        count_at_most(scores, alpha),
        scores.len(),
    ))
}

/// Cross-conformal p-value from per-fold calibration scores and per-fold test
/// scores: `(sum_k count_k + 1) / (l + 1)`.
pub fn ccp_pvalue(fold_scores: &[&[f64]], test_scores: &[f64]) -> Result<PValue> {
    if fold_scores.len() != test_scores.len() {
        return Err(Error::invalid("one test score per fold required"));
    }
    if fold_scores.len() < 2 {
        return Err(Error::invalid("at least 2 folds required"));
    }
    if fold_scores.iter().any(|f| f.is_empty()) {
        return Err(Error::invalid("every fold must be non-empty"));
    }
    let l = fold_scores.iter().map(|f| f.len()).sum();
    let count = fold_scores
        .iter()
        .zip(test_scores)
        .map(|(f, &a)| count_at_most(f, a))
        .sum();
    Ok(PValue::from_rank(count, l))
}

/// `pbar + (K - 1) / (l + 1) * (pbar - 1)` with `pbar` the mean of the fold
/// p-values, in exact arithmetic.
///
/// With equal fold sizes `l / K` this equals the cross-conformal p-value.
/// Each input must be a rank p-value of a fold of size `l / K`.
pub fn modified_mean(fold_pvalues: &[Rational], l: usize, k: usize) -> Result<Rational> {
    if k < 2 {
        return Err(Error::invalid(format!(
            "at least 2 folds required, got {k}"
        )));
    }
    if fold_pvalues.len() != k {
        return Err(Error::invalid(format!(
            "expected {k} fold p-values, got {}",
            fold_pvalues.len()
        )));
    }
    if !l.is_multiple_of(k) {
        return Err(Error::invalid(format!(
            "equal folds required: {l} examples do not split into {k} equal folds"
        )));
    }
    let fold_den = (l / k + 1) as i128;
    for p in fold_pvalues {
        let scaled = p * Rational::from_integer(fold_den);
        if !scaled.is_integer() || *p <= Rational::from_integer(0) || *p > Rational::from_integer(1)
        {
            return Err(Error::invalid(format!(
                "{p} is not a p-value of a fold of size {}",
                l / k
            )));
        }
    }
    let mean = fold_pvalues.iter().sum::<Rational>() / Rational::from_integer(k as i128);
    let factor = Rational::new(k as i128 - 1, l as i128 + 1);
    Ok(mean + factor * (mean - Rational::from_integer(1)))
}

/// Floating-point form of [`modified_mean`] without the divisibility checks.
pub fn modified_mean_f64(fold_pvalues: &[f64], l: usize) -> f64 {
    let k = fold_pvalues.len() as f64;
    let mean = fold_pvalues.iter().sum::<f64>() / k;
    mean + (k - 1.0) / (l as f64 + 1.0) * (mean - 1.0)
}

/// Calibration scores kept sorted for `O(log n)` rank queries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SortedScores(Vec<f64>);

impl SortedScores {
    pub fn new(mut scores: Vec<f64>) -> Result<Self> {
        if scores.iter().any(|s| s.is_nan()) {
            return Err(Error::invalid("conformity score is NaN"));
        }
        scores.sort_by(f64::total_cmp);
        Ok(Self(scores))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `|{i : s_i <= alpha}|`.
    pub fn count_at_most(&self, alpha: f64) -> usize {
        self.0.partition_point(|&s| s <= alpha)
    }
}

fn score_examples<M: ConformityMeasure>(
    measure: &M,
    rule: &M::Rule,
    data: &LabeledDataset,
    indices: &[usize],
) -> Result<Vec<f64>> {
    indices
        .iter()
        .map(|&i| measure.score(rule, data.object(i), data.label(i)))
        .collect()
}

fn check_training_set(data: &LabeledDataset, num_indices: usize) -> Result<()> {
    if data.len() < 2 {
        return Err(Error::invalid("at least 2 training examples required"));
    }
    if num_indices != data.len() {
        return Err(Error::invalid(format!(
            "partition covers {num_indices} indices but the training set has {}",
            data.len()
        )));
    }
    Ok(())
}

/// A trained inductive conformal predictor.
pub struct Icp<M: ConformityMeasure> {
    measure: M,
    rule: M::Rule,
    calibration: SortedScores,
    n_labels: usize,
}

impl<M: ConformityMeasure> Icp<M> {
    /// Trains the rule on `split.proper_training()` and scores the calibration
    /// set once.
    pub fn fit(measure: M, data: &LabeledDataset, split: &SplitPartition) -> Result<Self> {
        check_training_set(data, split.num_indices())?;
        let rule = measure.fit(data, split.proper_training(), 0)?;
        let scores = score_examples(&measure, &rule, data, split.calibration())?;
        Ok(Self {
            calibration: SortedScores::new(scores)?,
            measure,
            rule,
            n_labels: data.n_labels(),
        })
    }

    pub fn rule(&self) -> &M::Rule {
        &self.rule
    }

    pub fn calibration_scores(&self) -> &SortedScores {
        &self.calibration
    }

    pub fn test_scores(&self, object: Object<'_>) -> Result<Vec<f64>> {
        self.measure.score_labels(&self.rule, object, self.n_labels)
    }

    pub fn pvalues(&self, object: Object<'_>) -> Result<PValueMap> {
        let n = self.calibration.len();
        let values = self
            .test_scores(object)?
            .into_iter()
            .map(|a| PValue::from_rank(self.calibration.count_at_most(a), n))
            .collect();
        PValueMap::new(values, Some(n))
    }

    /// p-values for every object of `test`, in order.
    pub fn pvalues_batch(&self, test: &LabeledDataset) -> Result<Vec<PValueMap>> {
        (0..test.len())
            .into_par_iter()
            .map(|i| self.pvalues(test.object(i)))
            .collect()
    }
}

struct FoldModel<R> {
    rule: R,
    calibration: SortedScores,
}

/// A trained cross-conformal predictor: one rule and one sorted calibration
/// score list per fold.
pub struct Ccp<M: ConformityMeasure> {
    measure: M,
    folds: Vec<FoldModel<M::Rule>>,
    num_examples: usize,
    n_labels: usize,
}

impl<M: ConformityMeasure> Ccp<M> {
    /// Trains one rule per fold on the other folds. Folds are trained in
    /// parallel; the result does not depend on scheduling.
    pub fn fit(measure: M, data: &LabeledDataset, folds: &FoldPartition) -> Result<Self> {
        check_training_set(data, folds.num_indices())?;
        let fitted: Result<Vec<_>> = (0..folds.num_folds())
            .into_par_iter()
            .map(|k| {
                let rule = measure
                    .fit(data, &folds.complement(k), k)
                    .map_err(|e| e.context(format!("fold {k}")))?;
                let scores = score_examples(&measure, &rule, data, folds.fold(k))
                    .map_err(|e| e.context(format!("fold {k}")))?;
                Ok(FoldModel {
                    rule,
                    calibration: SortedScores::new(scores)?,
                })
            })
            .collect();
        Ok(Self {
            folds: fitted?,
            measure,
            num_examples: data.len(),
            n_labels: data.n_labels(),
        })
    }

    pub fn num_folds(&self) -> usize {
        self.folds.len()
    }

    pub fn fold_rule(&self, k: usize) -> &M::Rule {
        &self.folds[k].rule
    }

    pub fn fold_calibration_scores(&self, k: usize) -> &SortedScores {
        &self.folds[k].calibration
    }

    /// `test_scores[k][y]`: the score of `(object, y)` under fold `k`'s rule.
    pub fn test_scores(&self, object: Object<'_>) -> Result<Vec<Vec<f64>>> {
        self.folds
            .iter()
            .map(|f| self.measure.score_labels(&f.rule, object, self.n_labels))
            .collect()
    }

    /// `counts[y][k]`: calibration scores of fold `k` that are `<=` the test
    /// score of label `y`.
    fn counts(&self, object: Object<'_>) -> Result<Vec<Vec<usize>>> {
        let scores = self.test_scores(object)?;
        Ok((0..self.n_labels)
            .map(|y| {
                self.folds
                    .iter()
                    .zip(&scores)
                    .map(|(f, s)| f.calibration.count_at_most(s[y]))
                    .collect()
            })
            .collect())
    }

    fn merged(&self, counts: &[Vec<usize>]) -> Result<PValueMap> {
        let l = self.num_examples;
        let values = counts
            .iter()
            .map(|c| PValue::from_rank(c.iter().sum(), l))
            .collect();
        PValueMap::new(values, Some(l))
    }

    fn per_fold(&self, counts: &[Vec<usize>]) -> Vec<Vec<PValue>> {
        counts
            .iter()
            .map(|c| {
                c.iter()
                    .zip(&self.folds)
                    .map(|(&n, f)| PValue::from_rank(n, f.calibration.len()))
                    .collect()
            })
            .collect()
    }

    fn fisher(&self, per_fold: &[Vec<PValue>]) -> Result<PValueMap> {
        let values = per_fold
            .iter()
            .map(|ps| {
                let vs: Vec<f64> = ps.iter().map(PValue::value).collect();
                fisher_combine(&vs).map(PValue::Real)
            })
            .collect::<Result<_>>()?;
        PValueMap::new(values, None)
    }

    /// Cross-conformal p-values (pooled rank counts).
    pub fn pvalues(&self, object: Object<'_>) -> Result<PValueMap> {
        self.merged(&self.counts(object)?)
    }

    /// `fold_pvalues[y][k]`: the separate p-value of label `y` in fold `k`.
    pub fn fold_pvalues(&self, object: Object<'_>) -> Result<Vec<Vec<PValue>>> {
        Ok(self.per_fold(&self.counts(object)?))
    }

    /// Naive cross-conformal p-values: Fisher's combination of the fold
    /// p-values.
    pub fn naive_pvalues(&self, object: Object<'_>) -> Result<PValueMap> {
        self.fisher(&self.fold_pvalues(object)?)
    }

    /// Cross-conformal and naive p-values from one pass over the folds.
    pub fn both_pvalues(&self, object: Object<'_>) -> Result<(PValueMap, PValueMap)> {
        let counts = self.counts(object)?;
        Ok((self.merged(&counts)?, self.fisher(&self.per_fold(&counts))?))
    }

    pub fn pvalues_batch(&self, test: &LabeledDataset) -> Result<Vec<PValueMap>> {
        (0..test.len())
            .into_par_iter()
            .map(|i| self.pvalues(test.object(i)))
            .collect()
    }

    pub fn naive_pvalues_batch(&self, test: &LabeledDataset) -> Result<Vec<PValueMap>> {
        (0..test.len())
            .into_par_iter()
            .map(|i| self.naive_pvalues(test.object(i)))
            .collect()
    }

    /// `(cross-conformal, naive)` p-values for every object of `test`.
    pub fn both_pvalues_batch(&self, test: &LabeledDataset) -> Result<Vec<(PValueMap, PValueMap)>> {
        (0..test.len())
            .into_par_iter()
            .map(|i| self.both_pvalues(test.object(i)))
            .collect()
    }
}

/// Trains an ICP and returns the p-values of one test object.
pub fn icp_pvalues<M: ConformityMeasure>(
    train: &LabeledDataset,
    split: &SplitPartition,
    measure: M,
    x: Object<'_>,
) -> Result<PValueMap> {
    Icp::fit(measure, train, split)?.pvalues(x)
}

/// Trains a CCP and returns the p-values of one test object.
pub fn ccp_pvalues<M: ConformityMeasure>(
    train: &LabeledDataset,
    folds: &FoldPartition,
    measure: M,
    x: Object<'_>,
) -> Result<PValueMap> {
    Ccp::fit(measure, train, folds)?.pvalues(x)
}

/// Trains the fold rules and returns the Fisher-combined p-values of one test
/// object.
pub fn naive_ccp_pvalues<M: ConformityMeasure>(
    train: &LabeledDataset,
    folds: &FoldPartition,
    measure: M,
    x: Object<'_>,
) -> Result<PValueMap> {
    Ccp::fit(measure, train, folds)?.naive_pvalues(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Example;
    use crate::learners::{BaselineLogistic, ScoreTable};
    use std::collections::HashMap;

    #[test]
    fn icp_pvalue_examples() {
        let cal = [0.2, 0.5, 0.9, 1.3];
        assert_eq!(fold_pvalue(&cal, 0.7).unwrap().value(), 0.6);
        assert_eq!(
            fold_pvalue(&cal, 0.1).unwrap().exact(),
            Some(Rational::new(1, 5))
        );
        assert_eq!(fold_pvalue(&cal, 1.3).unwrap().value(), 1.0);
        assert_eq!(fold_pvalue(&cal, 7.0).unwrap().value(), 1.0);
    }

    #[test]
    fn fold_pvalue_examples() {
        let fold = [1.0, 3.0, 5.0];
        assert_eq!(fold_pvalue(&fold, 4.0).unwrap().value(), 0.75);
        assert_eq!(fold_pvalue(&fold, 0.0).unwrap().value(), 0.25);
        assert_eq!(fold_pvalue(&fold, 5.0).unwrap().value(), 1.0);
        assert!(matches!(
            fold_pvalue(&[], 1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn ccp_pvalue_worked_instance() {
        // l = 6, K = 2; fold counts 2 and 1
        let f1 = [0.1, 0.2, 0.9];
        let f2 = [0.3, 0.8, 0.95];
        let p = ccp_pvalue(&[&f1, &f2], &[0.5, 0.5]).unwrap();
        assert_eq!(p.exact(), Some(Rational::new(4, 7)));
        assert_eq!(
            ccp_pvalue(&[&f1, &f2], &[0.0, 0.0]).unwrap().exact(),
            Some(Rational::new(1, 7))
        );
        assert_eq!(ccp_pvalue(&[&f1, &f2], &[1.0, 1.0]).unwrap().value(), 1.0);
    }

    #[test]
    fn modified_mean_worked_instance() {
        let p = modified_mean(&[Rational::new(3, 4), Rational::new(1, 2)], 6, 2).unwrap();
        assert_eq!(p, Rational::new(4, 7));
        let one = Rational::from_integer(1);
        assert_eq!(modified_mean(&[one; 5], 50, 5).unwrap(), one);
        assert!((modified_mean_f64(&[0.75, 0.5], 6) - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn modified_mean_rejects_unequal_folds() {
        let half = Rational::new(1, 2);
        assert!(modified_mean(&[half, half], 7, 2).is_err());
        assert!(modified_mean(&[half], 6, 1).is_err());
        assert!(modified_mean(&[half, half, half], 6, 2).is_err());
        // 1/3 is not a rank p-value of a fold of size 3
        assert!(modified_mean(&[Rational::new(1, 3), half], 6, 2).is_err());
    }

    #[test]
    fn modified_mean_is_near_the_plain_mean() {
        let ps = [
            Rational::new(3, 11),
            Rational::new(7, 11),
            Rational::new(10, 11),
        ];
        let mm = modified_mean(&ps, 30, 3).unwrap();
        let mean = ps.iter().sum::<Rational>() / Rational::from_integer(3);
        let gap = if mm > mean { mm - mean } else { mean - mm };
        assert!(gap <= Rational::new(2, 31));
    }

    #[test]
    fn sorted_counts_match_enumeration_with_ties() {
        let raw = vec![0.5, 0.1, 0.5, 0.3, 0.5, 0.9];
        let sorted = SortedScores::new(raw.clone()).unwrap();
        for a in [0.0, 0.1, 0.3, 0.4, 0.5, 0.9, 1.0] {
            assert_eq!(sorted.count_at_most(a), count_at_most(&raw, a));
        }
        assert!(SortedScores::new(vec![f64::NAN]).is_err());
    }

    fn table_predictor_data() -> (LabeledDataset, ScoreTable) {
        // Scores equal to the row id's feature so results are easy to reason about.
        let examples: Vec<Example> = (0..6)
            .map(|i| Example::new(vec![i as f64], i % 2))
            .collect();
        let data = LabeledDataset::new(examples, 2).unwrap();
        let table = ScoreTable::new(
            "t",
            (0..10)
                .map(|i| (i, i as f64 - 3.0))
                .collect::<HashMap<_, _>>(),
        );
        (data, table)
    }

    #[test]
    fn logit_delta_is_antisymmetric() {
        let (data, table) = table_predictor_data();
        let measure = LogitDelta::new(crate::learners::ExternalScores::new(vec![table]));
        let rule = measure.fit(&data, &[0, 1, 2], 0).unwrap();
        for i in 0..data.len() {
            let s = measure.score_labels(&rule, data.object(i), 2).unwrap();
            assert_eq!(s[1], -s[0]);
            assert_eq!(s[1], measure.score(&rule, data.object(i), 1).unwrap());
        }
        assert!(measure.score(&rule, data.object(0), 2).is_err());
    }

    #[test]
    fn icp_with_external_table() {
        let (data, table) = table_predictor_data();
        let split = SplitPartition::new(6, vec![0, 1, 2], vec![3, 4, 5], 0).unwrap();
        let measure = LogitDelta::new(crate::learners::ExternalScores::new(vec![table]));
        let icp = Icp::fit(measure, &data, &split).unwrap();
        // calibration: row 3 (y=1) -> 0, row 4 (y=0) -> -1, row 5 (y=1) -> 2
        assert_eq!(icp.calibration_scores().as_slice(), &[-1.0, 0.0, 2.0]);
        let x = [0.0];
        let p = icp
            .pvalues(Object {
                row: 7,
                features: &x,
            })
            .unwrap();
        // f = 4: a^0 = -4 (count 0), a^1 = 4 (count 3)
        assert_eq!(p.get(0).exact(), Some(Rational::new(1, 4)));
        assert_eq!(p.get(1).exact(), Some(Rational::new(1, 1)));
    }

    #[test]
    fn naive_ccp_all_ones_is_one() {
        let (data, table) = table_predictor_data();
        let folds = FoldPartition::from_folds(6, vec![vec![0, 2, 4], vec![1, 3, 5]], 0).unwrap();
        let measure = LogitDelta::new(crate::learners::ExternalScores::new(vec![
            table.clone(),
            table,
        ]));
        let ccp = Ccp::fit(measure, &data, &folds).unwrap();
        let x = [0.0];
        // row 9 -> f = 6 beats every calibration score for label 1
        let naive = ccp
            .naive_pvalues(Object {
                row: 9,
                features: &x,
            })
            .unwrap();
        assert_eq!(naive.value(1), 1.0);
        assert!(FoldPartition::from_folds(6, vec![(0..6).collect()], 0).is_err());
    }

    #[test]
    fn predictors_need_two_examples_and_matching_partitions() {
        let data = LabeledDataset::new(vec![Example::new(vec![0.0], 0)], 2).unwrap();
        let split = SplitPartition::new(2, vec![0], vec![1], 0).unwrap();
        assert!(Icp::fit(LogitDelta::new(BaselineLogistic), &data, &split).is_err());
    }
}
