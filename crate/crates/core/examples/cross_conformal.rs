//! Cross-conformal prediction against an inductive predictor trained on the
//! same data: validity at a few significance levels and mean confidence.
//!
//! cargo run --release --example cross_conformal

use cross_conformal::conformal::{Ccp, Icp, LogitDelta};
use cross_conformal::data::shuffle_and_split;
use cross_conformal::eval::{calibration_curve, SyntheticGenerator};
use cross_conformal::learners::{BoostedStumps, BoostingConfig};
use cross_conformal::partition::{make_folds, make_split};
use cross_conformal::{Label, PValueMap};

fn report(name: &str, pvalues: Vec<PValueMap>, labels: &[Label]) -> cross_conformal::Result<()> {
    let grid = [0.01, 0.05, 0.1, 0.2];
    let results: Vec<(PValueMap, Label)> =
        pvalues.into_iter().zip(labels.iter().copied()).collect();
    let curve = calibration_curve(&results, &grid)?;
    let mut confidence = 0.0;
    for (p, _) in &results {
        confidence += p.confidence_credibility()?.confidence;
    }
    print!(
        "{name:<8} mean confidence {:.4}  errors:",
        confidence / results.len() as f64
    );
    for (eps, rate) in curve.points() {
        print!("  {eps}: {rate:.3}");
    }
    println!();
    Ok(())
}

fn main() -> cross_conformal::Result<()> {
    let data = SyntheticGenerator::new(10, 2.5, 0.02).sample(2000, 3);
    let (train, test) = shuffle_and_split(&data, 1000, 3)?;
    let learner = BoostedStumps::new(BoostingConfig {
        num_trees: 150,
        ..BoostingConfig::default()
    });

    let icp = Icp::fit(
        LogitDelta::new(&learner),
        &train,
        &make_split(train.len(), (2, 1), 3)?,
    )?;
    report("ICP", icp.pvalues_batch(&test)?, test.labels())?;

    for k in [5, 10] {
        let ccp = Ccp::fit(
            LogitDelta::new(&learner),
            &train,
            &make_folds(train.len(), k, 3)?,
        )?;
        report(
            &format!("CCP K={k}"),
            ccp.pvalues_batch(&test)?,
            test.labels(),
        )?;
    }
    Ok(())
}
