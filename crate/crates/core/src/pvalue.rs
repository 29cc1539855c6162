//! Conformal p-values and the two ways of packaging them.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::data::Label;
use crate::error::{Error, Result};

/// Exact rational used for rank-based p-values.
pub type Rational = Ratio<i128>;

/// A p-value in `(0, 1]`.
///
/// Rank-based p-values (ICP, CCP) are kept as exact fractions
/// `(count + 1) / (n + 1)`; p-values produced by a continuous combining
/// function (Fisher) are plain floats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PValue {
    Rank(Rational),
    Real(f64),
}

impl PValue {
    /// `(count + 1) / (n + 1)`, where `count` of the `n` calibration scores are
    /// `<=` the test score.
    pub fn from_rank(count: usize, n: usize) -> Self {
        debug_assert!(count <= n);
        PValue::Rank(Rational::new(count as i128 + 1, n as i128 + 1))
    }

    pub fn value(&self) -> f64 {
        match *self {
            PValue::Rank(r) => *r.numer() as f64 / *r.denom() as f64,
            PValue::Real(v) => v,
        }
    }

    pub fn exact(&self) -> Option<Rational> {
        match *self {
            PValue::Rank(r) => Some(r),
            PValue::Real(_) => None,
        }
    }
}

/// The p-value of every candidate label for one test object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PValueMap {
    values: Vec<PValue>,
    calibration_size: Option<usize>,
}

impl PValueMap {
    /// `values[y]` is the p-value of label `y`. `calibration_size` is the
    /// number of calibration scores behind rank-based p-values; every value
    /// must then lie in `[1/(n+1), 1]`.
    pub fn new(values: Vec<PValue>, calibration_size: Option<usize>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("p-value map needs at least one label"));
        }
        let floor = calibration_size.map_or(0.0, |n| 1.0 / (n as f64 + 1.0));
        for (y, p) in values.iter().enumerate() {
            let v = p.value();
            if !(v > 0.0 && v <= 1.0 && v >= floor) {
                return Err(Error::invalid(format!(
                    "p-value {v} for label {y} is outside [{floor}, 1]"
                )));
            }
        }
        Ok(Self {
            values,
            calibration_size,
        })
    }

    /// Convenience constructor from floating-point values.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| PValue::Real(v)).collect(), None)
    }

    pub fn n_labels(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, label: Label) -> PValue {
        self.values[label]
    }

    pub fn value(&self, label: Label) -> f64 {
        self.values[label].value()
    }

    pub fn values(&self) -> &[PValue] {
        &self.values
    }

    pub fn calibration_size(&self) -> Option<usize> {
        self.calibration_size
    }

    /// `{y : p^y > epsilon}` for `epsilon` in `(0, 1)`.
    pub fn prediction_set(&self, epsilon: f64) -> Result<PredictionSet> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::invalid(format!(
                "significance level must lie in (0, 1), got {epsilon}"
            )));
        }
        let members = (0..self.values.len())
            .filter(|&y| self.value(y) > epsilon)
            .collect();
        Ok(PredictionSet { epsilon, members })
    }

    /// Confidence is one minus the second-largest p-value; credibility is the
    /// largest p-value.
    pub fn confidence_credibility(&self) -> Result<ConfidenceCredibility> {
        if self.values.len() < 2 {
            return Err(Error::invalid(
                "confidence needs a label alphabet of at least 2 labels",
            ));
        }
        let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.values {
            let v = p.value();
            if v > first {
                second = first;
                first = v;
            } else if v > second {
                second = v;
            }
        }
        Ok(ConfidenceCredibility {
            confidence: 1.0 - second,
            credibility: first,
        })
    }
}

/// A set prediction at significance level `epsilon`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub epsilon: f64,
    pub members: Vec<Label>,
}

impl PredictionSet {
    pub fn contains(&self, label: Label) -> bool {
        self.members.contains(&label)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceCredibility {
    pub confidence: f64,
    pub credibility: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn prediction_set_examples() {
        let p = PValueMap::from_values(&[0.03, 0.62]).unwrap();
        assert_eq!(p.prediction_set(0.05).unwrap().members, vec![1]);
        // strict inequality: a tie with epsilon is excluded
        assert!(p.prediction_set(0.62).unwrap().is_empty());
        assert_eq!(p.prediction_set(0.01).unwrap().members, vec![0, 1]);
    }

    #[test]
    fn epsilon_below_minimum_rank_pvalue_keeps_everything() {
        let n = 9;
        let p = PValueMap::new(
            vec![PValue::from_rank(0, n), PValue::from_rank(3, n)],
            Some(n),
        )
        .unwrap();
        assert_eq!(p.prediction_set(0.099).unwrap().len(), 2);
    }

    #[test]
    fn prediction_set_rejects_bad_epsilon() {
        let p = PValueMap::from_values(&[0.5, 0.5]).unwrap();
        for eps in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                p.prediction_set(eps),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn confidence_credibility_examples() {
        let cc = PValueMap::from_values(&[0.03, 0.62])
            .unwrap()
            .confidence_credibility()
            .unwrap();
        assert!((cc.confidence - 0.97).abs() < 1e-12);
        assert_eq!(cc.credibility, 0.62);

        let cc = PValueMap::from_values(&[0.5, 0.5])
            .unwrap()
            .confidence_credibility()
            .unwrap();
        assert_eq!((cc.confidence, cc.credibility), (0.5, 0.5));

        let cc = PValueMap::from_values(&[0.1, 0.4, 0.9])
            .unwrap()
            .confidence_credibility()
            .unwrap();
        assert!((cc.confidence - 0.6).abs() < 1e-12);
        assert_eq!(cc.credibility, 0.9);

        let single = PValueMap::from_values(&[0.4]).unwrap();
        assert!(matches!(
            single.confidence_credibility(),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn rank_pvalue_range_is_enforced() {
        assert!(PValueMap::new(vec![PValue::Real(0.05)], Some(9)).is_err());
        assert!(PValueMap::new(vec![PValue::Real(0.0)], None).is_err());
        assert!(PValueMap::new(vec![PValue::Real(1.01)], None).is_err());
        assert_eq!(PValue::from_rank(2, 4).exact(), Some(Rational::new(3, 5)));
    }

    proptest! {
        #[test]
        fn prediction_sets_shrink_as_epsilon_grows(
            ps in proptest::collection::vec(0.001f64..=1.0, 2..6)
        ) {
            let map = PValueMap::from_values(&ps).unwrap();
            let grid: Vec<f64> = (1..200).map(|i| i as f64 / 200.0).collect();
            for w in grid.windows(2) {
                let wide = map.prediction_set(w[0]).unwrap();
                let narrow = map.prediction_set(w[1]).unwrap();
                prop_assert!(narrow.members.iter().all(|y| wide.contains(*y)));
            }
        }
    }
}
