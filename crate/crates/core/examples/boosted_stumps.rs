//! The boosted-stump learner on its own: training and test deviance as trees
//! are added.
//!
//! cargo run --release --example boosted_stumps

use cross_conformal::data::shuffle_and_split;
use cross_conformal::eval::SyntheticGenerator;
use cross_conformal::learners::{binomial_deviance, train_boosted_stumps, BoostingConfig};
use cross_conformal::LabeledDataset;

fn mean_deviance(
    model: &cross_conformal::learners::BoostedModel,
    data: &LabeledDataset,
    trees: usize,
) -> f64 {
    (0..data.len())
        .map(|i| {
            binomial_deviance(
                data.label(i) as f64,
                model.predict_staged(data.features(i), trees),
            )
        })
        .sum::<f64>()
        / data.len() as f64
}

fn main() -> cross_conformal::Result<()> {
    let data = SyntheticGenerator::new(20, 3.0, 0.05).sample(3000, 2);
    let (train, test) = shuffle_and_split(&data, 2000, 2)?;
    let config = BoostingConfig {
        num_trees: 500,
        bag_fraction: 0.5,
        rng_seed: 2,
        ..BoostingConfig::default()
    };
    let model = train_boosted_stumps(&train, &config)?;
    println!("initial log-odds {:.4}", model.initial_score());
    println!("{:>6} {:>12} {:>12}", "trees", "train dev.", "test dev.");
    for trees in [0, 10, 50, 100, 250, 500] {
        println!(
            "{trees:>6} {:>12.5} {:>12.5}",
            mean_deviance(&model, &train, trees),
            mean_deviance(&model, &test, trees)
        );
    }
    let errors = (0..test.len())
        .filter(|&i| usize::from(model.predict(test.features(i)) > 0.0) != test.label(i))
        .count();
    println!("test error rate {:.4}", errors as f64 / test.len() as f64);
    Ok(())
}
