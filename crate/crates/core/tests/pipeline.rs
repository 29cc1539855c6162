use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::Command;

use cross_conformal::data::shuffle_and_split;
use cross_conformal::eval::{SummaryTable, SyntheticGenerator};
use cross_conformal::experiment::{
    external_score_path, parse_curve_csv, parse_eps_grid, parse_summary_csv, plan_seed,
    run_on_dataset, run_seed, write_outputs, LearnerKind, Method, OutputFormat, RunConfig,
};
use cross_conformal::learners::{BoostedStumps, BoostingConfig, Learner, ScoringRule};
use cross_conformal::LabeledDataset;

fn small_config() -> RunConfig {
    RunConfig {
        methods: vec![Method::Icp, Method::Ccp, Method::NaiveCcp],
        folds: Some(vec![3, 4]),
        learner: LearnerKind::Boost,
        boosting: BoostingConfig {
            num_trees: 40,
            ..BoostingConfig::default()
        },
        seeds: vec![0, 1, 2],
        train_size: 150,
        eps_grid: parse_eps_grid("full").unwrap(),
        ..RunConfig::default()
    }
}

fn write_scores(path: &Path, data: &LabeledDataset, rule: &impl ScoringRule) {
    let mut s = String::from("row_index,score\n");
    for i in 0..data.len() {
        writeln!(
            s,
            "{},{}",
            data.row_id(i),
            rule.score(data.object(i)).unwrap()
        )
        .unwrap();
    }
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, s).unwrap();
}

/// Rows of `data` with the given identifiers, as indices.
fn indices_of(data: &LabeledDataset, rows: &[usize]) -> Vec<usize> {
    let pos: HashMap<usize, usize> = (0..data.len()).map(|i| (data.row_id(i), i)).collect();
    rows.iter().map(|r| pos[r]).collect()
}

#[test]
fn external_scores_reproduce_the_built_in_learner() {
    let data = SyntheticGenerator::new(4, 2.0, 0.05).sample(220, 5);
    let config = small_config();
    let dir = tempfile::tempdir().unwrap();

    for &seed in &config.seeds {
        let plan = plan_seed(&config, &data, seed).unwrap();
        let learner = BoostedStumps::new(BoostingConfig {
            rng_seed: config.boosting.rng_seed.wrapping_add(seed),
            ..config.boosting.clone()
        });
        let model = learner
            .train(&data, &indices_of(&data, &plan.icp_proper_rows), 0)
            .unwrap();
        write_scores(&external_score_path(dir.path(), seed, None), &data, &model);
        for (k, folds) in &plan.folds {
            for f in 0..*k {
                let rest: Vec<usize> = folds
                    .iter()
                    .enumerate()
                    .filter(|&(g, _)| g != f)
                    .flat_map(|(_, rows)| rows.iter().copied())
                    .collect();
                let model = learner.train(&data, &indices_of(&data, &rest), f).unwrap();
                write_scores(
                    &external_score_path(dir.path(), seed, Some((*k, f))),
                    &data,
                    &model,
                );
            }
        }
    }

    let external = RunConfig {
        learner: LearnerKind::External,
        scores_dir: Some(dir.path().to_path_buf()),
        ..config.clone()
    };
    // Scores went through decimal text, which round-trips f64 exactly.
    assert_eq!(
        run_on_dataset(&external, &data).unwrap(),
        run_on_dataset(&config, &data).unwrap()
    );
}

#[test]
fn missing_external_rows_are_reported() {
    let data = SyntheticGenerator::new(2, 2.0, 0.0).sample(60, 1);
    let dir = tempfile::tempdir().unwrap();
    let path = external_score_path(dir.path(), 0, None);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(&path, "row_index,score\n0,1.0\n").unwrap();
    let config = RunConfig {
        methods: vec![Method::Icp],
        learner: LearnerKind::External,
        scores_dir: Some(dir.path().to_path_buf()),
        seeds: vec![0],
        train_size: 40,
        ..RunConfig::default()
    };
    let err = run_seed(&config, &data, 0).unwrap_err();
    assert!(
        matches!(err.root(), cross_conformal::Error::MissingScore { .. }),
        "{err}"
    );
    assert!(err.to_string().contains("seed 0"), "{err}");
}

#[test]
fn plan_matches_the_protocol_split() {
    let data = SyntheticGenerator::new(3, 1.0, 0.0).sample(100, 2);
    let config = RunConfig {
        train_size: 70,
        ..small_config()
    };
    let plan = plan_seed(&config, &data, 7).unwrap();
    let (train, test) = shuffle_and_split(&data, 70, 7).unwrap();
    assert_eq!(
        plan.train_rows,
        (0..train.len())
            .map(|i| train.row_id(i))
            .collect::<Vec<_>>()
    );
    assert_eq!(
        plan.test_rows,
        (0..test.len()).map(|i| test.row_id(i)).collect::<Vec<_>>()
    );
    let mut icp_rows: Vec<usize> = plan
        .icp_proper_rows
        .iter()
        .chain(&plan.icp_calibration_rows)
        .copied()
        .collect();
    icp_rows.sort_unstable();
    let mut train_rows = plan.train_rows.clone();
    train_rows.sort_unstable();
    assert_eq!(icp_rows, train_rows);
    assert_eq!(
        (plan.icp_proper_rows.len(), plan.icp_calibration_rows.len()),
        (47, 23)
    );
    for (k, folds) in &plan.folds {
        assert_eq!(folds.len(), *k);
        assert_eq!(folds.iter().map(Vec::len).sum::<usize>(), 70);
    }
}

fn round_trip(table: &SummaryTable) {
    let dir = tempfile::tempdir().unwrap();
    let written = write_outputs(table, OutputFormat::Csv, dir.path()).unwrap();
    let rows =
        parse_summary_csv(&fs::read_to_string(dir.path().join("summary.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 2 * table.rows.len());
    for (pair, method) in rows.chunks(2).zip(&table.rows) {
        assert_eq!(pair[0].method, method.method);
        assert_eq!(pair[0].statistic, "mean_confidence");
        assert_eq!(pair[0].average, method.average_confidence);
        assert_eq!(pair[1].st_dev, method.std_dev_credibility);
        let seeds: Vec<(u64, f64)> = method
            .reports
            .iter()
            .map(|r| (r.seed, r.mean_confidence))
            .collect();
        assert_eq!(pair[0].per_seed, seeds);
        for report in &method.reports {
            let path = dir
                .path()
                .join("curves")
                .join(format!("{}_seed{}.csv", method.method, report.seed));
            assert!(written.contains(&path));
            assert_eq!(
                parse_curve_csv(&fs::read_to_string(&path).unwrap()).unwrap(),
                report.curve
            );
        }
    }

    write_outputs(table, OutputFormat::Json, dir.path()).unwrap();
    let json: SummaryTable =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(&json, table);
}

#[test]
fn outputs_round_trip() {
    let data = SyntheticGenerator::new(3, 2.0, 0.1).sample(200, 3);
    let table = run_on_dataset(&small_config(), &data).unwrap();
    round_trip(&table);

    // One seed: no standard deviation, written as an empty cell.
    let single = RunConfig {
        seeds: vec![4],
        ..small_config()
    };
    let table = run_on_dataset(&single, &data).unwrap();
    assert!(table.rows.iter().all(|r| r.std_dev_confidence.is_none()));
    round_trip(&table);
}

fn write_dataset(path: &Path, data: &LabeledDataset) {
    let mut s = String::new();
    for i in 0..data.len() {
        for x in data.features(i) {
            write!(s, "{x},").unwrap();
        }
        writeln!(s, "{}", data.label(i)).unwrap();
    }
    fs::write(path, s).unwrap();
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cross-conformal"))
}

#[test]
fn cli_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write_dataset(&csv, &SyntheticGenerator::new(4, 2.0, 0.05).sample(160, 9));
    let run = |out: &str, format: &str| {
        let status = cli()
            .args(["--data", csv.to_str().unwrap()])
            .args([
                "--method",
                "icp,ccp,naive-ccp",
                "--folds",
                "5,10",
                "--trees",
                "30",
            ])
            .args([
                "--bag-fraction",
                "0.5",
                "--seeds",
                "0,1,2",
                "--train-size",
                "120",
            ])
            .args(["--eps-grid", "full+corner", "--format", format])
            .args(["--out", dir.path().join(out).to_str().unwrap()])
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        String::from_utf8(status.stdout).unwrap()
    };
    let (a, b) = (run("a", "csv"), run("b", "csv"));
    assert_eq!(a, b);
    assert!(a.contains("mean conf., CCP-K10"), "{a}");
    let files = |d: &str| {
        let mut v: Vec<_> = walk(&dir.path().join(d));
        v.sort();
        v
    };
    let (fa, fb) = (files("a"), files("b"));
    assert_eq!(fa.len(), 1 + 5 * 3);
    for (x, y) in fa.iter().zip(&fb) {
        assert_eq!(x.file_name(), y.file_name());
        assert_eq!(
            fs::read(x).unwrap(),
            fs::read(y).unwrap(),
            "{}",
            x.display()
        );
    }
    run("j1", "json");
    run("j2", "json");
    assert_eq!(
        fs::read(dir.path().join("j1/report.json")).unwrap(),
        fs::read(dir.path().join("j2/report.json")).unwrap()
    );
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}

#[test]
fn cli_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    write_dataset(&csv, &SyntheticGenerator::new(2, 2.0, 0.0).sample(50, 1));
    let fails = |args: &[&str], needle: &str| {
        let out = cli().args(args).output().unwrap();
        assert!(!out.status.success(), "{args:?} should fail");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{args:?}: {err}");
    };
    let data = csv.to_str().unwrap();
    fails(
        &["--data", data, "--method", "icp", "--folds", "5"],
        "--folds",
    );
    fails(
        &["--data", data, "--method", "ccp", "--split-ratio", "2:1"],
        "--split-ratio",
    );
    fails(&["--data", data, "--method", "knn"], "knn");
    fails(&["--data", data, "--learner", "external"], "--scores-dir");
    fails(&["--data", data, "--train-size", "50"], "train");

    let ragged = dir.path().join("ragged.csv");
    fs::write(&ragged, "1,2,0\n3,1\n").unwrap();
    fails(&["--data", ragged.to_str().unwrap()], "row 2");
    let bad_label = dir.path().join("label.csv");
    fs::write(&bad_label, "1,2,0\n3,1,7\n").unwrap();
    fails(&["--data", bad_label.to_str().unwrap()], "label");
}
