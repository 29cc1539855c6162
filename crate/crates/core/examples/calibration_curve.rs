//! Writes `epsilon,error_rate` calibration curves for ICP, CCP and naive CCP
//! to stdout, on the full grid and the low-significance corner.
//!
//! cargo run --release --example calibration_curve > curves.csv

use cross_conformal::conformal::{Ccp, Icp, LogitDelta};
use cross_conformal::data::shuffle_and_split;
use cross_conformal::eval::{calibration_curve, SyntheticGenerator};
use cross_conformal::experiment::parse_eps_grid;
use cross_conformal::learners::BaselineLogistic;
use cross_conformal::partition::{make_folds, make_split};
use cross_conformal::PValueMap;

fn main() -> cross_conformal::Result<()> {
    let data = SyntheticGenerator::new(5, 1.5, 0.1).sample(3000, 4);
    let (train, test) = shuffle_and_split(&data, 1000, 4)?;
    let grid = parse_eps_grid("full+corner")?;
    let labelled = |p: Vec<PValueMap>| {
        p.into_iter()
            .zip(test.labels().iter().copied())
            .collect::<Vec<_>>()
    };

    let icp = Icp::fit(
        LogitDelta::new(BaselineLogistic),
        &train,
        &make_split(train.len(), (2, 1), 4)?,
    )?;
    let ccp = Ccp::fit(
        LogitDelta::new(BaselineLogistic),
        &train,
        &make_folds(train.len(), 5, 4)?,
    )?;
    let (merged, naive): (Vec<_>, Vec<_>) = ccp.both_pvalues_batch(&test)?.into_iter().unzip();

    println!("method,epsilon,error_rate");
    for (name, pvalues) in [
        ("ICP", icp.pvalues_batch(&test)?),
        ("CCP-K5", merged),
        ("naive-CCP-K5", naive),
    ] {
        let curve = calibration_curve(&labelled(pvalues), &grid)?;
        for (eps, rate) in curve.points() {
            println!("{name},{eps},{rate}");
        }
        eprintln!(
            "{name}: max |error - eps| on [0, 0.2] = {:.4}",
            curve.max_deviation(0.2)
        );
    }
    Ok(())
}
