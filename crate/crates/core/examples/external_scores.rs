//! Plugging in scores from an outside learner.
//!
//! The run plan says which rows each rule is trained on; an external program
//! trains there and writes `row_index,score` files in the layout the
//! `external` learner reads. Here the "outside" learner is the built-in
//! logistic baseline, so the result can be compared with a direct run.
//!
//! cargo run --release --example external_scores

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;

use cross_conformal::eval::SyntheticGenerator;
use cross_conformal::experiment::{
    external_score_path, plan_seed, run_on_dataset, LearnerKind, Method, RunConfig,
};
use cross_conformal::learners::{BaselineLogistic, Learner, ScoringRule};
use cross_conformal::LabeledDataset;

fn score_file(data: &LabeledDataset, train_rows: &[usize]) -> cross_conformal::Result<String> {
    let index: HashMap<usize, usize> = (0..data.len()).map(|i| (data.row_id(i), i)).collect();
    let indices: Vec<usize> = train_rows.iter().map(|r| index[r]).collect();
    let rule = BaselineLogistic.train(data, &indices, 0)?;
    let mut s = String::from("row_index,score\n");
    for i in 0..data.len() {
        let _ = writeln!(s, "{},{}", data.row_id(i), rule.score(data.object(i))?);
    }
    Ok(s)
}

fn main() -> cross_conformal::Result<()> {
    let data = SyntheticGenerator::new(5, 2.0, 0.05).sample(600, 6);
    let dir = std::env::temp_dir().join("cross-conformal-external-example");
    let config = RunConfig {
        methods: vec![Method::Icp, Method::Ccp],
        folds: Some(vec![5]),
        learner: LearnerKind::Baseline,
        seeds: vec![0, 1],
        train_size: 400,
        ..RunConfig::default()
    };

    for &seed in &config.seeds {
        let plan = plan_seed(&config, &data, seed)?;
        let write = |path: std::path::PathBuf, body: String| -> cross_conformal::Result<()> {
            fs::create_dir_all(path.parent().unwrap()).map_err(|e| cross_conformal::Error::Io {
                path: path.clone(),
                source: e,
            })?;
            fs::write(&path, body).map_err(|e| cross_conformal::Error::Io { path, source: e })
        };
        write(
            external_score_path(&dir, seed, None),
            score_file(&data, &plan.icp_proper_rows)?,
        )?;
        for (k, folds) in &plan.folds {
            for f in 0..*k {
                let rest: Vec<usize> = folds
                    .iter()
                    .enumerate()
                    .filter(|&(g, _)| g != f)
                    .flat_map(|(_, rows)| rows.iter().copied())
                    .collect();
                write(
                    external_score_path(&dir, seed, Some((*k, f))),
                    score_file(&data, &rest)?,
                )?;
            }
        }
    }
    println!("score files under {}", dir.display());

    let direct = run_on_dataset(&config, &data)?;
    let external = run_on_dataset(
        &RunConfig {
            learner: LearnerKind::External,
            scores_dir: Some(dir.clone()),
            ..config.clone()
        },
        &data,
    )?;
    for (a, b) in direct.rows.iter().zip(&external.rows) {
        println!(
            "{:<8} mean confidence direct {:.6}, external {:.6}",
            a.method, a.average_confidence, b.average_confidence
        );
    }
    println!("identical: {}", direct == external);
    Ok(())
}
