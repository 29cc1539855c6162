//! Experiment orchestration: dataset ingestion, run configuration, the
//! per-seed protocol, and machine-readable output.
//!
//! For every seed the protocol shuffles the dataset, cuts off `train_size`
//! training examples (the rest is the test set), trains each requested
//! predictor on the training part and computes p-values for every test
//! object. Each (method, seed) pair yields a [`SeedReport`]; reports are then
//! summarized per method.
//!
//! # External score layout
//!
//! With [`LearnerKind::External`] the scores come from files under
//! `scores_dir`, keyed by the 0-based data row of the input CSV:
//!
//! ```text
//! <scores_dir>/seed<S>/icp.csv          rule trained on the ICP proper training set
//! <scores_dir>/seed<S>/k<K>/fold<k>.csv rule trained on every fold but fold k (0-based)
//! ```
//!
//! Each file is `row_index,score` and must cover the calibration rows it is
//! used for and every test row. [`plan_seed`] reports which rows those are.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conformal::{Ccp, Icp, LogitDelta};
use crate::data::{shuffle_and_split, Label, LabeledDataset, Object};
use crate::error::{Error, Result};
use crate::eval::{
    corner_grid, full_grid, percent, CalibrationCurve, MethodSummary, SeedReport, SummaryTable,
};
use crate::learners::{
    BaselineLogistic, BoostedModel, BoostedStumps, BoostingConfig, ExternalScores, Learner,
    LogisticModel, ScoreTable, ScoringRule,
};
use crate::partition::{make_folds, make_split};
use crate::pvalue::PValueMap;

/// Reads a Spambase-layout CSV: no header, numeric feature columns, and an
/// integer label in `{0, 1}` in the last column. Row identifiers are the
/// 0-based line numbers.
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let parse_err = |row: Option<usize>, column: Option<usize>, message: String| Error::Parse {
        path: path.to_path_buf(),
        row,
        column,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_err(None, None, format!("{other:?}")),
        })?;

    let mut width = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| parse_err(Some(line), None, e.to_string()))?;
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_err(
                Some(line),
                None,
                format!("expected {w} columns, found {}", record.len()),
            ));
        }
        if w < 2 {
            return Err(parse_err(
                Some(line),
                None,
                "need at least one feature and a label".into(),
            ));
        }
        for (j, cell) in record.iter().take(w - 1).enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                parse_err(Some(line), Some(j + 1), format!("`{cell}` is not a number"))
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    Some(line),
                    Some(j + 1),
                    "feature must be finite".into(),
                ));
            }
            features.push(v);
        }
        let cell = &record[w - 1];
        let label: i64 = cell.parse().map_err(|_| {
            parse_err(
                Some(line),
                Some(w),
                format!("label `{cell}` is not an integer"),
            )
        })?;
        if label != 0 && label != 1 {
            return Err(Error::Validation(format!(
                "{}: row {line} has label {label}, expected 0 or 1",
                path.display()
            )));
        }
        labels.push(label as Label);
    }
    let Some(w) = width else {
        return Err(parse_err(None, None, "file contains no rows".into()));
    };
    let rows = (0..labels.len()).collect();
    let data = LabeledDataset::from_parts(features, w - 1, labels, rows, 2)?;
    log::info!(
        "{}: {} examples, {} features",
        path.display(),
        data.len(),
        data.dim()
    );
    Ok(data)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Icp,
    Ccp,
    NaiveCcp,
}

impl Method {
    pub fn uses_folds(self) -> bool {
        matches!(self, Method::Ccp | Method::NaiveCcp)
    }

    /// Row label used in reports, e.g. `ICP`, `CCP-K5`, `naive-CCP-K10`.
    pub fn row_name(self, folds: Option<usize>) -> String {
        match (self, folds) {
            (Method::Icp, _) => "ICP".to_string(),
            (Method::Ccp, Some(k)) => format!("CCP-K{k}"),
            (Method::NaiveCcp, Some(k)) => format!("naive-CCP-K{k}"),
            (Method::Ccp, None) => "CCP".to_string(),
            (Method::NaiveCcp, None) => "naive-CCP".to_string(),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "icp" => Ok(Method::Icp),
            "ccp" => Ok(Method::Ccp),
            "naive-ccp" => Ok(Method::NaiveCcp),
            other => Err(Error::invalid(format!(
                "unknown method `{other}` (expected icp, ccp or naive-ccp)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    Boost,
    Baseline,
    External,
}

impl FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boost" => Ok(LearnerKind::Boost),
            "baseline" => Ok(LearnerKind::Baseline),
            "external" => Ok(LearnerKind::External),
            other => Err(Error::invalid(format!(
                "unknown learner `{other}` (expected boost, baseline or external)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::invalid(format!(
                "unknown format `{other}` (expected csv or json)"
            ))),
        }
    }
}

/// Parses a significance grid: `full` (0.00..1.00 step 0.01), `corner`
/// (0.000..0.100 step 0.002), `full+corner`, `start:stop:step`, or an explicit
/// comma-separated list.
pub fn parse_eps_grid(spec: &str) -> Result<Vec<f64>> {
    let mut grid: Vec<f64> = Vec::new();
    for part in spec.split('+') {
        match part.trim() {
            "full" => grid.extend(full_grid()),
            "corner" => grid.extend(corner_grid()),
            range if range.contains(':') => {
                let nums: Vec<f64> = range
                    .split(':')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::invalid(format!("bad grid range `{range}`")))?;
                let [start, stop, step] = nums[..] else {
                    return Err(Error::invalid(format!(
                        "grid range `{range}` needs start:stop:step"
                    )));
                };
                if step.is_nan() || step <= 0.0 || stop < start {
                    return Err(Error::invalid(format!("bad grid range `{range}`")));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                grid.extend((0..=n).map(|i| start + i as f64 * step));
            }
            list => {
                for s in list.split(',') {
                    grid.push(
                        s.trim()
                            .parse()
                            .map_err(|_| Error::invalid(format!("bad significance level `{s}`")))?,
                    );
                }
            }
        }
    }
    // Snap to 1e-12 so `full+corner` merges shared points.
    for e in grid.iter_mut() {
        *e = (*e * 1e12).round() / 1e12;
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.is_empty() || grid.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(Error::invalid(format!(
            "grid `{spec}` must be non-empty within [0, 1]"
        )));
    }
    Ok(grid)
}

/// Everything that defines one experiment run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data_path: PathBuf,
    pub methods: Vec<Method>,
    /// Fold counts for the cross-conformal methods; defaults to `[5]`.
    pub folds: Option<Vec<usize>>,
    /// ICP proper-training : calibration proportion; defaults to `2:1`.
    pub split_ratio: Option<(usize, usize)>,
    pub learner: LearnerKind,
    pub boosting: BoostingConfig,
    pub seeds: Vec<u64>,
    pub train_size: usize,
    pub eps_grid: Vec<f64>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub scores_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data_path: PathBuf::from("spambase.data"),
            methods: vec![Method::Icp, Method::Ccp],
            folds: None,
            split_ratio: None,
            learner: LearnerKind::Boost,
            boosting: BoostingConfig::default(),
            seeds: (0..8).collect(),
            train_size: 3600,
            eps_grid: parse_eps_grid("full+corner").expect("built-in grid"),
            format: OutputFormat::Csv,
            out: None,
            scores_dir: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("no method selected"));
        }
        let any_folds = self.methods.iter().any(|m| m.uses_folds());
        let any_icp = self.methods.contains(&Method::Icp);
        if self.folds.is_some() && !any_folds {
            return Err(Error::invalid(
                "--folds only applies to the ccp and naive-ccp methods",
            ));
        }
        if self.split_ratio.is_some() && !any_icp {
            return Err(Error::invalid(
                "--split-ratio only applies to the icp method",
            ));
        }
        if let Some(folds) = &self.folds {
            if folds.is_empty() || folds.iter().any(|&k| k < 2) {
                return Err(Error::invalid("every fold count must be at least 2"));
            }
        }
        if let Some((a, b)) = self.split_ratio {
            if a == 0 || b == 0 {
                return Err(Error::invalid("split ratio parts must be positive"));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("no seeds given"));
        }
        if self.learner == LearnerKind::External && self.scores_dir.is_none() {
            return Err(Error::invalid("the external learner needs --scores-dir"));
        }
        if self.learner == LearnerKind::Boost {
            self.boosting.validate()?;
        }
        Ok(())
    }

    pub fn fold_counts(&self) -> Vec<usize> {
        self.folds.clone().unwrap_or_else(|| vec![5])
    }

    pub fn ratio(&self) -> (usize, usize) {
        self.split_ratio.unwrap_or((2, 1))
    }
}

/// Any built-in learner, so one code path can run all of them.
pub enum AnyLearner {
    Boost(BoostedStumps),
    Baseline(BaselineLogistic),
    External(ExternalScores),
}

pub enum AnyRule {
    Boost(BoostedModel),
    Baseline(LogisticModel),
    External(Arc<ScoreTable>),
}

impl ScoringRule for AnyRule {
    fn score(&self, object: Object<'_>) -> Result<f64> {
        match self {
            AnyRule::Boost(r) => r.score(object),
            AnyRule::Baseline(r) => r.score(object),
            AnyRule::External(r) => r.score(object),
        }
    }
}

impl Learner for AnyLearner {
    type Rule = AnyRule;

    fn train(&self, data: &LabeledDataset, indices: &[usize], run: usize) -> Result<AnyRule> {
        Ok(match self {
            AnyLearner::Boost(l) => AnyRule::Boost(l.train(data, indices, run)?),
            AnyLearner::Baseline(l) => AnyRule::Baseline(l.train(data, indices, run)?),
            AnyLearner::External(l) => AnyRule::External(l.train(data, indices, run)?),
        })
    }
}

/// Where the external score file for one training run lives.
pub fn external_score_path(scores_dir: &Path, seed: u64, folds: Option<(usize, usize)>) -> PathBuf {
    let base = scores_dir.join(format!("seed{seed}"));
    match folds {
        None => base.join("icp.csv"),
        Some((k, fold)) => base.join(format!("k{k}")).join(format!("fold{fold}.csv")),
    }
}

fn learner_for(config: &RunConfig, seed: u64, folds: Option<usize>) -> Result<AnyLearner> {
    Ok(match config.learner {
        LearnerKind::Boost => AnyLearner::Boost(BoostedStumps::new(BoostingConfig {
            rng_seed: config.boosting.rng_seed.wrapping_add(seed),
            ..config.boosting.clone()
        })),
        LearnerKind::Baseline => AnyLearner::Baseline(BaselineLogistic),
        LearnerKind::External => {
            let dir = config
                .scores_dir
                .as_deref()
                .ok_or_else(|| Error::invalid("the external learner needs --scores-dir"))?;
            let tables = match folds {
                None => vec![ScoreTable::from_csv(external_score_path(dir, seed, None))?],
                Some(k) => (0..k)
                    .map(|f| ScoreTable::from_csv(external_score_path(dir, seed, Some((k, f)))))
                    .collect::<Result<_>>()?,
            };
            AnyLearner::External(ExternalScores::new(tables))
        }
    })
}

/// Rows (original identifiers) involved in one seed of the protocol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub seed: u64,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub icp_proper_rows: Vec<usize>,
    pub icp_calibration_rows: Vec<usize>,
    /// `(K, folds)`, each fold listed as row identifiers.
    pub folds: Vec<(usize, Vec<Vec<usize>>)>,
}

/// The exact train/test split, ICP split and fold assignment [`run_on_dataset`]
/// uses for `seed`.
pub fn plan_seed(config: &RunConfig, data: &LabeledDataset, seed: u64) -> Result<SeedPlan> {
    let (train, test) = shuffle_and_split(data, config.train_size, seed)?;
    let rows =
        |d: &LabeledDataset, idx: &[usize]| idx.iter().map(|&i| d.row_id(i)).collect::<Vec<_>>();
    let split = make_split(train.len(), config.ratio(), seed)?;
    let folds = config
        .fold_counts()
        .into_iter()
        .map(|k| {
            let p = make_folds(train.len(), k, seed)?;
            Ok((k, p.folds().iter().map(|f| rows(&train, f)).collect()))
        })
        .collect::<Result<_>>()?;
    Ok(SeedPlan {
        seed,
        train_rows: (0..train.len()).map(|i| train.row_id(i)).collect(),
        test_rows: (0..test.len()).map(|i| test.row_id(i)).collect(),
        icp_proper_rows: rows(&train, split.proper_training()),
        icp_calibration_rows: rows(&train, split.calibration()),
        folds,
    })
}

fn with_truth(pvalues: Vec<PValueMap>, test: &LabeledDataset) -> Vec<(PValueMap, Label)> {
    pvalues
        .into_iter()
        .zip(test.labels().iter().copied())
        .collect()
}

/// Every method's report for one seed, as `(row name, report)` pairs.
pub fn run_seed(
    config: &RunConfig,
    data: &LabeledDataset,
    seed: u64,
) -> Result<Vec<(String, SeedReport)>> {
    let ctx = |e: Error, what: &str| e.context(format!("seed {seed}, {what}"));
    let (train, test) =
        shuffle_and_split(data, config.train_size, seed).map_err(|e| ctx(e, "split"))?;
    let grid = &config.eps_grid;
    let mut out = Vec::new();

    if config.methods.contains(&Method::Icp) {
        log::info!("seed {seed}: ICP");
        let split = make_split(train.len(), config.ratio(), seed).map_err(|e| ctx(e, "ICP"))?;
        let learner = learner_for(config, seed, None).map_err(|e| ctx(e, "ICP"))?;
        let icp = Icp::fit(LogitDelta::new(learner), &train, &split).map_err(|e| ctx(e, "ICP"))?;
        let results = with_truth(icp.pvalues_batch(&test).map_err(|e| ctx(e, "ICP"))?, &test);
        out.push((
            Method::Icp.row_name(None),
            SeedReport::from_results(seed, &results, grid)?,
        ));
    }

    let want_ccp = config.methods.contains(&Method::Ccp);
    let want_naive = config.methods.contains(&Method::NaiveCcp);
    if want_ccp || want_naive {
        for k in config.fold_counts() {
            let what = format!("K={k}");
            log::info!("seed {seed}: cross-conformal, {what}");
            let folds = make_folds(train.len(), k, seed).map_err(|e| ctx(e, &what))?;
            let learner = learner_for(config, seed, Some(k)).map_err(|e| ctx(e, &what))?;
            let ccp =
                Ccp::fit(LogitDelta::new(learner), &train, &folds).map_err(|e| ctx(e, &what))?;
            let (merged, naive): (Vec<_>, Vec<_>) = ccp
                .both_pvalues_batch(&test)
                .map_err(|e| ctx(e, &what))?
                .into_iter()
                .unzip();
            if want_ccp {
                let results = with_truth(merged, &test);
                out.push((
                    Method::Ccp.row_name(Some(k)),
                    SeedReport::from_results(seed, &results, grid)?,
                ));
            }
            if want_naive {
                let results = with_truth(naive, &test);
                out.push((
                    Method::NaiveCcp.row_name(Some(k)),
                    SeedReport::from_results(seed, &results, grid)?,
                ));
            }
        }
    }
    Ok(out)
}

/// Runs every seed on an in-memory dataset.
pub fn run_on_dataset(config: &RunConfig, data: &LabeledDataset) -> Result<SummaryTable> {
    config.validate()?;
    let mut by_method: Vec<(String, Vec<SeedReport>)> = Vec::new();
    for &seed in &config.seeds {
        for (name, report) in run_seed(config, data, seed)? {
            match by_method.iter_mut().find(|(n, _)| *n == name) {
                Some((_, reports)) => reports.push(report),
                None => by_method.push((name, vec![report])),
            }
        }
    }
    let rows = by_method
        .into_iter()
        .map(|(name, reports)| MethodSummary::new(name, reports))
        .collect::<Result<_>>()?;
    Ok(SummaryTable { rows })
}

/// Loads `config.data_path` and runs the protocol.
pub fn run_experiment(config: &RunConfig) -> Result<SummaryTable> {
    config.validate()?;
    let data = ingest_csv(&config.data_path)?;
    run_on_dataset(config, &data)
}

fn opt_value(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Summary CSV: one row per (method, statistic) with one column per
/// seed, then the average and sample standard deviation. Values are fractions.
pub fn summary_csv(table: &SummaryTable) -> String {
    let seeds: Vec<u64> = table
        .rows
        .first()
        .map(|r| r.reports.iter().map(|s| s.seed).collect())
        .unwrap_or_default();
    let mut s = String::from("method,statistic");
    for seed in &seeds {
        let _ = write!(s, ",seed_{seed}");
    }
    s.push_str(",average,st_dev\n");
    for row in &table.rows {
        let stats: [(&str, Vec<f64>, f64, Option<f64>); 2] = [
            (
                "mean_confidence",
                row.reports.iter().map(|r| r.mean_confidence).collect(),
                row.average_confidence,
                row.std_dev_confidence,
            ),
            (
                "mean_credibility",
                row.reports.iter().map(|r| r.mean_credibility).collect(),
                row.average_credibility,
                row.std_dev_credibility,
            ),
        ];
        for (name, values, avg, sd) in stats {
            let _ = write!(s, "{},{}", row.method, name);
            for v in values {
                let _ = write!(s, ",{v}");
            }
            let _ = writeln!(s, ",{avg},{}", opt_value(sd));
        }
    }
    s
}

/// `epsilon,error_rate` rows.
pub fn curve_csv(curve: &CalibrationCurve) -> String {
    let mut s = String::from("epsilon,error_rate\n");
    for (e, r) in curve.points() {
        let _ = writeln!(s, "{e},{r}");
    }
    s
}

/// Parses the output of [`curve_csv`].
pub fn parse_curve_csv(text: &str) -> Result<CalibrationCurve> {
    let mut lines = text.lines();
    if lines.next() != Some("epsilon,error_rate") {
        return Err(Error::Serialization(
            "missing `epsilon,error_rate` header".into(),
        ));
    }
    let (mut grid, mut error_rate) = (Vec::new(), Vec::new());
    for line in lines {
        let (e, r) = line
            .split_once(',')
            .ok_or_else(|| Error::Serialization(format!("bad curve line `{line}`")))?;
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Serialization(format!("bad number `{s}`")))
        };
        grid.push(parse(e)?);
        error_rate.push(parse(r)?);
    }
    Ok(CalibrationCurve { grid, error_rate })
}

/// One parsed row of [`summary_csv`].
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryCsvRow {
    pub method: String,
    pub statistic: String,
    pub per_seed: Vec<(u64, f64)>,
    pub average: f64,
    pub st_dev: Option<f64>,
}

/// Parses the output of [`summary_csv`].
pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryCsvRow>> {
    let bad = |m: String| Error::Serialization(m);
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad("empty summary".into()))?
        .split(',')
        .collect();
    let n = header.len();
    if n < 4 || header[..2] != ["method", "statistic"] || header[n - 2..] != ["average", "st_dev"] {
        return Err(bad("unexpected summary header".into()));
    }
    let seeds: Vec<u64> = header[2..n - 2]
        .iter()
        .map(|h| {
            h.strip_prefix("seed_")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(format!("bad seed column `{h}`")))
        })
        .collect::<Result<_>>()?;
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| bad(format!("bad number `{s}`")))
    };
    lines
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != n {
                return Err(bad(format!(
                    "summary line has {} cells, expected {n}",
                    cells.len()
                )));
            }
            Ok(SummaryCsvRow {
                method: cells[0].to_string(),
                statistic: cells[1].to_string(),
                per_seed: seeds
                    .iter()
                    .zip(&cells[2..n - 2])
                    .map(|(&s, c)| num(c).map(|v| (s, v)))
                    .collect::<Result<_>>()?,
                average: num(cells[n - 2])?,
                st_dev: if cells[n - 1].is_empty() {
                    None
                } else {
                    Some(num(cells[n - 1])?)
                },
            })
        })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes the results under `dir` and returns the written paths.
///
/// CSV: `summary.csv` plus `curves/<method>_seed<S>.csv` per report.
/// JSON: `report.json` holding the whole [`SummaryTable`].
pub fn write_outputs(
    table: &SummaryTable,
    format: OutputFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    match format {
        OutputFormat::Csv => {
            let path = dir.join("summary.csv");
            write_file(&path, &summary_csv(table))?;
            written.push(path);
            for row in &table.rows {
                for report in &row.reports {
                    let path = dir
                        .join("curves")
                        .join(format!("{}_seed{}.csv", row.method, report.seed));
                    write_file(&path, &curve_csv(&report.curve))?;
                    written.push(path);
                }
            }
        }
        OutputFormat::Json => {
            let path = dir.join("report.json");
            let json = serde_json::to_string_pretty(table)
                .map_err(|e| Error::Serialization(e.to_string()))?;
            write_file(&path, &(json + "\n"))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Human-readable table: per-seed mean confidence and credibility in percent
/// (2 decimals), then the average and standard deviation (3 decimals).
pub fn render_table(table: &SummaryTable) -> String {
    let seeds: Vec<u64> = table
        .rows
        .first()
        .map(|r| r.reports.iter().map(|s| s.seed).collect())
        .unwrap_or_default();
    let label_width = table
        .rows
        .iter()
        .map(|r| r.method.len() + 12)
        .max()
        .unwrap_or(10)
        .max(10);
    let mut s = format!("{:label_width$}", "Seed");
    for seed in &seeds {
        let _ = write!(s, " {seed:>8}");
    }
    let _ = writeln!(s, " {:>8} {:>8}", "Average", "St. dev.");
    for row in &table.rows {
        let lines = [
            (
                "mean conf.",
                row.reports
                    .iter()
                    .map(|r| r.mean_confidence)
                    .collect::<Vec<_>>(),
                row.average_confidence,
                row.std_dev_confidence,
            ),
            (
                "mean cred.",
                row.reports.iter().map(|r| r.mean_credibility).collect(),
                row.average_credibility,
                row.std_dev_credibility,
            ),
        ];
        for (name, values, avg, sd) in lines {
            let _ = write!(s, "{:label_width$}", format!("{name}, {}", row.method));
            for v in values {
                let _ = write!(s, " {:>8}", percent(v, 2));
            }
            let sd = sd.map(|v| percent(v, 3)).unwrap_or_else(|| "-".into());
            let _ = writeln!(s, " {:>8} {:>8}", percent(avg, 2), sd);
        }
    }
    s
}
