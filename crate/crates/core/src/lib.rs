//! Conformal set predictors for classification.
//!
//! The crate implements three predictors built on an inductive conformity
//! measure:
//!
//! * the **inductive conformal predictor** ([`conformal::Icp`]), which splits
//!   the training set into a proper training set and a calibration set;
//! * the **cross-conformal predictor** ([`conformal::Ccp`]), which splits the
//!   training set into `K` folds, uses each fold in turn as the calibration set
//!   and merges the rank counts of all folds into one p-value;
//! * the **naive cross-conformal predictor**, which instead combines the
//!   per-fold p-values with Fisher's method. It is included as a negative
//!   control: the fold p-values are strongly dependent, so Fisher's
//!   independence assumption fails and the predictor is badly miscalibrated.
//!
//! Each predictor emits a [`PValueMap`] per test object, which can be packaged
//! as a [`PredictionSet`] at a significance level `epsilon` or as a
//! [`ConfidenceCredibility`] pair.
//!
//! The conformity measure used throughout is [`conformal::LogitDelta`]: a
//! learner produces a log-odds score `f(x)` and the conformity of `(x, y)` is
//! `f(x)` for `y = 1` and `-f(x)` for `y = 0`. Learners live in [`learners`]:
//! gradient-boosted stumps with binomial deviance, a ridge-regularized logistic
//! baseline, and externally supplied score tables.
//!
//! ```
//! use cross_conformal::conformal::{Icp, LogitDelta};
//! use cross_conformal::eval::SyntheticGenerator;
//! use cross_conformal::learners::BaselineLogistic;
//! use cross_conformal::partition::make_split;
//!
//! let data = SyntheticGenerator::new(5, 2.0, 0.0).sample(300, 7);
//! let split = make_split(data.len(), (2, 1), 7).unwrap();
//! let icp = Icp::fit(LogitDelta::new(BaselineLogistic::default()), &data, &split).unwrap();
//!
//! let pvalues = icp.pvalues(data.object(0)).unwrap();
//! let set = pvalues.prediction_set(0.05).unwrap();
//! assert!(!set.is_empty());
//! ```

pub mod conformal;
pub mod data;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod fisher;
pub mod learners;
pub mod partition;
pub mod pvalue;
pub mod rng;

pub use data::{Example, Label, LabeledDataset, Object};
pub use error::{Error, Result};
pub use pvalue::{ConfidenceCredibility, PValue, PValueMap, PredictionSet};
