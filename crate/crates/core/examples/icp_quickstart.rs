//! Inductive conformal prediction with boosted stumps on synthetic data.
//!
//! cargo run --release --example icp_quickstart

use cross_conformal::conformal::{Icp, LogitDelta};
use cross_conformal::data::shuffle_and_split;
use cross_conformal::eval::SyntheticGenerator;
use cross_conformal::learners::{BoostedStumps, BoostingConfig};
use cross_conformal::partition::make_split;

fn main() -> cross_conformal::Result<()> {
    let data = SyntheticGenerator::new(5, 2.0, 0.05).sample(1000, 1);
    let (train, test) = shuffle_and_split(&data, 800, 1)?;

    // Proper training : calibration = 2 : 1.
    let split = make_split(train.len(), (2, 1), 1)?;
    let learner = BoostedStumps::new(BoostingConfig {
        num_trees: 200,
        ..BoostingConfig::default()
    });
    let icp = Icp::fit(LogitDelta::new(learner), &train, &split)?;
    println!(
        "trained on {} examples, calibrated on {}",
        split.proper_training().len(),
        split.calibration().len()
    );

    println!(
        "{:>4} {:>5} {:>8} {:>8} {:>10} {:>11} {:>9}",
        "row", "label", "p(0)", "p(1)", "set@0.05", "confidence", "credibility"
    );
    for i in 0..10 {
        let p = icp.pvalues(test.object(i))?;
        let set = p.prediction_set(0.05)?;
        let cc = p.confidence_credibility()?;
        println!(
            "{:>4} {:>5} {:>8.4} {:>8.4} {:>10} {:>11.4} {:>9.4}",
            test.row_id(i),
            test.label(i),
            p.value(0),
            p.value(1),
            format!("{:?}", set.members),
            cc.confidence,
            cc.credibility
        );
    }
    Ok(())
}
