//! Fold p-values of a cross-conformal predictor, merged by rank counts and by
//! Fisher's method. The Fisher combination treats the folds as independent,
//! which they are not, and produces far smaller p-values.
//!
//! cargo run --release --example fisher_naive

use cross_conformal::conformal::{Ccp, LogitDelta};
use cross_conformal::eval::SyntheticGenerator;
use cross_conformal::fisher::fisher_combine;
use cross_conformal::learners::BaselineLogistic;
use cross_conformal::partition::make_folds;

fn main() -> cross_conformal::Result<()> {
    // Worked instance: two folds with p-values 0.75 and 0.5.
    println!(
        "fisher_combine([0.75, 0.5]) = {:.5}",
        fisher_combine(&[0.75, 0.5])?
    );

    let data = SyntheticGenerator::pure_noise(5).sample(201, 8);
    let train = data.subset(&(0..200).collect::<Vec<_>>());
    let ccp = Ccp::fit(
        LogitDelta::new(BaselineLogistic),
        &train,
        &make_folds(200, 5, 8)?,
    )?;
    let object = data.object(200);

    let folds = ccp.fold_pvalues(object)?;
    let (merged, naive) = ccp.both_pvalues(object)?;
    for (y, fold) in folds.iter().enumerate() {
        let fold_values: Vec<String> = fold.iter().map(|p| format!("{:.3}", p.value())).collect();
        println!(
            "label {y}: folds [{}]  merged {:.4}  Fisher {:.4}",
            fold_values.join(", "),
            merged.value(y),
            naive.value(y)
        );
    }
    Ok(())
}
