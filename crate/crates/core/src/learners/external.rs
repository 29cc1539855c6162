//! Scores computed outside this crate, keyed by row identifier.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use super::{Learner, ScoringRule};
use crate::data::{LabeledDataset, Object};
use crate::error::{Error, Result};

/// A lookup table `row identifier -> score`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScoreTable {
    name: String,
    scores: HashMap<usize, f64>,
}

impl ScoreTable {
    pub fn new(name: impl Into<String>, scores: HashMap<usize, f64>) -> Self {
        Self {
            name: name.into(),
            scores,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn get(&self, row: usize) -> Option<f64> {
        self.scores.get(&row).copied()
    }

    /// Reads a two-column `row_index,score` CSV. A header line whose first
    /// field is `row_index` is skipped.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let parse_err = |row: Option<usize>, column: Option<usize>, message: String| Error::Parse {
            path: path.to_path_buf(),
            row,
            column,
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::io(path, io),
                other => parse_err(None, None, format!("{other:?}")),
            })?;
        let mut scores = HashMap::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 1;
            let record = record.map_err(|e| parse_err(Some(line), None, e.to_string()))?;
            if i == 0 && record.get(0) == Some("row_index") {
                continue;
            }
            if record.len() != 2 {
                return Err(parse_err(
                    Some(line),
                    None,
                    format!(
                        "expected 2 columns (row_index,score), found {}",
                        record.len()
                    ),
                ));
            }
            let row: usize = record[0].parse().map_err(|_| {
                parse_err(
                    Some(line),
                    Some(1),
                    format!("`{}` is not a row index", &record[0]),
                )
            })?;
            let score: f64 = record[1].parse().map_err(|_| {
                parse_err(
                    Some(line),
                    Some(2),
                    format!("`{}` is not a number", &record[1]),
                )
            })?;
            if !score.is_finite() {
                return Err(parse_err(
                    Some(line),
                    Some(2),
                    "score must be finite".into(),
                ));
            }
            if scores.insert(row, score).is_some() {
                return Err(parse_err(
                    Some(line),
                    Some(1),
                    format!("row {row} appears twice"),
                ));
            }
        }
        if scores.is_empty() {
            return Err(parse_err(None, None, "score table is empty".into()));
        }
        let name = path.display().to_string();
        Ok(Self { name, scores })
    }
}

impl ScoringRule for ScoreTable {
    fn score(&self, object: Object<'_>) -> Result<f64> {
        self.get(object.row).ok_or_else(|| Error::MissingScore {
            row: object.row,
            table: self.name.clone(),
        })
    }
}

/// Wraps one table as a scoring rule.
pub fn external_scores(table: ScoreTable) -> ScoreTable {
    table
}

/// A "learner" that ignores its training data and hands out precomputed
/// tables: table `k` for training run `k` (fold `k`, or `0` for an ICP).
#[derive(Clone, Debug, Default)]
pub struct ExternalScores {
    tables: Vec<Arc<ScoreTable>>,
}

impl ExternalScores {
    pub fn new(tables: Vec<ScoreTable>) -> Self {
        Self {
            tables: tables.into_iter().map(Arc::new).collect(),
        }
    }

    pub fn num_tables(&self) -> usize {
        self.tables.len()
    }
}

impl Learner for ExternalScores {
    type Rule = Arc<ScoreTable>;

    fn train(
        &self,
        _data: &LabeledDataset,
        _indices: &[usize],
        run: usize,
    ) -> Result<Arc<ScoreTable>> {
        self.tables.get(run).cloned().ok_or_else(|| {
            Error::invalid(format!(
                "no external score table for training run {run} ({} tables loaded)",
                self.tables.len()
            ))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn lookup_and_missing_row() {
        let table = external_scores(ScoreTable::new("t", HashMap::from([(7, 2.3)])));
        let x = [0.0];
        assert_eq!(
            table
                .score(Object {
                    row: 7,
                    features: &x
                })
                .unwrap(),
            2.3
        );
        let err = table
            .score(Object {
                row: 8,
                features: &x,
            })
            .unwrap_err();
        assert!(matches!(err, Error::MissingScore { row: 8, .. }));
    }

    #[test]
    fn reads_csv_with_and_without_header() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "row_index,score\n3,1.5\n10,-0.25").unwrap();
        let t = ScoreTable::from_csv(f.path()).unwrap();
        assert_eq!((t.get(3), t.get(10), t.len()), (Some(1.5), Some(-0.25), 2));

        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "0,1\n1,2").unwrap();
        assert_eq!(ScoreTable::from_csv(g.path()).unwrap().len(), 2);
    }

    #[test]
    fn csv_errors_name_the_row() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "0,1.0\n1,abc").unwrap();
        match ScoreTable::from_csv(f.path()).unwrap_err() {
            Error::Parse { row, column, .. } => assert_eq!((row, column), (Some(2), Some(2))),
            other => panic!("unexpected {other}"),
        }
        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "0,1.0\n0,2.0").unwrap();
        assert!(ScoreTable::from_csv(g.path()).is_err());
    }

    #[test]
    fn learner_hands_out_table_per_run() {
        let ext = ExternalScores::new(vec![
            ScoreTable::new("a", HashMap::from([(0, 1.0)])),
            ScoreTable::new("b", HashMap::from([(0, 2.0)])),
        ]);
        let data = LabeledDataset::new(vec![crate::Example::new(vec![0.0], 0)], 2).unwrap();
        assert_eq!(ext.train(&data, &[0], 1).unwrap().name(), "b");
        assert!(ext.train(&data, &[0], 2).is_err());
    }
}
