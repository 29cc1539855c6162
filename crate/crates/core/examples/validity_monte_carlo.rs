//! Monte Carlo validity check: fresh training set and test example per trial.
//! ICP error rates stay below eps; the Fisher-combined CCP overshoots.
//!
//! cargo run --release --example validity_monte_carlo [trials]

use cross_conformal::conformal::{Ccp, Icp, LogitDelta};
use cross_conformal::eval::{validity_mc, SyntheticGenerator};
use cross_conformal::learners::BaselineLogistic;
use cross_conformal::partition::{make_folds, make_split};

fn main() -> cross_conformal::Result<()> {
    env_logger::init();
    let trials = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2000);
    let grid = [0.01, 0.05, 0.1, 0.2];
    let gen = SyntheticGenerator::pure_noise(5);

    let icp = validity_mc(
        |train, x, seed| {
            let split = make_split(train.len(), (2, 1), seed)?;
            Icp::fit(LogitDelta::new(BaselineLogistic), train, &split)?.pvalues(x)
        },
        &gen,
        300,
        trials,
        &grid,
        1,
    )?;
    let naive = validity_mc(
        |train, x, seed| {
            let folds = make_folds(train.len(), 5, seed)?;
            Ccp::fit(LogitDelta::new(BaselineLogistic), train, &folds)?.naive_pvalues(x)
        },
        &gen,
        300,
        trials,
        &grid,
        1,
    )?;

    println!("{trials} trials, pure-noise labels");
    println!(
        "{:>6} {:>18} {:>12}",
        "eps", "ICP (3 s.e. bound)", "naive CCP"
    );
    for (i, &eps) in grid.iter().enumerate() {
        println!(
            "{eps:>6} {:>8.4} ({:.4}) {:>12.4}",
            icp.error_rate[i],
            icp.upper_band(eps, 3.0),
            naive.error_rate[i]
        );
    }
    Ok(())
}
