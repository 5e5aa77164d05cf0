//! The results table and its CSV form.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::config::{Mode, Scheme};
use super::ExperimentError;
use crate::evaluate::{aggregate, MetricsReport};

pub const ALL: &str = "ALL";
pub const MEAN: &str = "MEAN";

/// One results record. `country` is a name or `ALL`, `milestone` a date or
/// `MEAN`, `seed` a number or `MEAN` (mean over seeds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub algorithm: String,
    pub mode: Mode,
    pub scheme: Scheme,
    pub country: String,
    pub milestone: String,
    pub mape: Option<f64>,
    pub mae: f64,
    pub rmse: f64,
    pub seconds: f64,
    pub n_scored: usize,
    pub n_skipped: usize,
    pub seed: String,
}

impl ResultRow {
    pub fn is_leaf(&self) -> bool {
        self.milestone != MEAN && self.seed != MEAN
    }

    pub fn report(&self) -> MetricsReport {
        MetricsReport {
            mape: self.mape,
            mae: self.mae,
            rmse: self.rmse,
            n_scored: self.n_scored,
            n_skipped_zero_target: self.n_skipped,
            wall_seconds: self.seconds,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
}

/// Identifies one (algorithm, mode, scheme, seed) run within a table.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct RunKey {
    pub algorithm: String,
    pub mode: Mode,
    pub scheme: Scheme,
    pub seed: String,
}

pub(crate) fn round_seconds(s: f64) -> f64 {
    (s * 1000.0).round() / 1000.0
}

pub(crate) fn row_from(key: &RunKey, country: &str, milestone: &str, r: &MetricsReport) -> ResultRow {
    ResultRow {
        algorithm: key.algorithm.clone(),
        mode: key.mode,
        scheme: key.scheme,
        country: country.to_string(),
        milestone: milestone.to_string(),
        mape: r.mape,
        mae: r.mae,
        rmse: r.rmse,
        seconds: round_seconds(r.wall_seconds),
        n_scored: r.n_scored,
        n_skipped: r.n_skipped_zero_target,
        seed: key.seed.clone(),
    }
}

impl ResultsTable {
    pub fn leaf_rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.is_leaf())
    }

    pub fn find(&self, algorithm: &str, country: &str, milestone: &str, seed: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| {
            r.algorithm == algorithm && r.country == country && r.milestone == milestone && r.seed == seed
        })
    }

    /// The row summarizing one algorithm overall (`ALL`, `MEAN`), preferring
    /// the seed mean when present.
    pub fn grand_mean(&self, algorithm: &str, mode: Mode, scheme: Scheme) -> Option<&ResultRow> {
        let candidates: Vec<&ResultRow> = self
            .rows
            .iter()
            .filter(|r| {
                r.algorithm == algorithm
                    && r.mode == mode
                    && r.scheme == scheme
                    && r.country == ALL
                    && r.milestone == MEAN
            })
            .collect();
        candidates
            .iter()
            .find(|r| r.seed == MEAN)
            .or_else(|| candidates.first())
            .copied()
    }

    /// Per-country milestone-mean MAPE of one algorithm, averaged over seeds
    /// when it ran with several. Countries with undefined MAPE are left out.
    pub fn country_mapes(&self, algorithm: &str, mode: Mode, scheme: Scheme) -> BTreeMap<String, f64> {
        let rows: Vec<&ResultRow> = self
            .rows
            .iter()
            .filter(|r| {
                r.algorithm == algorithm
                    && r.mode == mode
                    && r.scheme == scheme
                    && r.country != ALL
                    && r.milestone == MEAN
            })
            .collect();
        let has_seed_mean = rows.iter().any(|r| r.seed == MEAN);
        let mut out = BTreeMap::new();
        for r in rows {
            if !has_seed_mean || r.seed == MEAN {
                if let Some(m) = r.mape {
                    out.insert(r.country.clone(), m);
                }
            }
        }
        out
    }

    /// (algorithm, mode, scheme) combinations present, in first-seen order.
    pub fn groups(&self) -> Vec<(String, Mode, Scheme)> {
        let mut out: Vec<(String, Mode, Scheme)> = Vec::new();
        for r in &self.rows {
            let g = (r.algorithm.clone(), r.mode, r.scheme);
            if !out.contains(&g) {
                out.push(g);
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), ExperimentError> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(r)?;
        }
        if self.rows.is_empty() {
            w.write_record([
                "algorithm", "mode", "scheme", "country", "milestone", "mape", "mae", "rmse",
                "seconds", "n_scored", "n_skipped", "seed",
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, ExperimentError> {
        let mut r = csv::Reader::from_reader(reader);
        let rows = r.deserialize().collect::<Result<Vec<ResultRow>, _>>()?;
        Ok(Self { rows })
    }

    /// Grand-mean rows ordered by MAPE, undefined last.
    pub fn summary(&self) -> Vec<&ResultRow> {
        let mut rows: Vec<&ResultRow> = self
            .groups()
            .into_iter()
            .filter_map(|(a, m, s)| self.grand_mean(&a, m, s))
            .collect();
        rows.sort_by(|a, b| match (a.mape, b.mape) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.algorithm.cmp(&b.algorithm),
        });
        rows
    }
}

/// Appends `(country, MEAN)` rows per country (in `countries` order) and an
/// `(ALL, MEAN)` row to the leaf rows of one run.
///
/// In single-country mode the overall row averages the country means. In
/// multi-country mode it averages the pooled `(ALL, milestone)` rows.
pub(crate) fn add_mean_rows(key: &RunKey, leaf: &[ResultRow], countries: &[String]) -> Vec<ResultRow> {
    let mut out = leaf.to_vec();
    let mut country_means = Vec::new();
    for c in countries {
        let reports: Vec<MetricsReport> = leaf.iter().filter(|r| &r.country == c).map(ResultRow::report).collect();
        if reports.is_empty() {
            continue;
        }
        let agg = aggregate(&reports);
        out.push(row_from(key, c, MEAN, &agg.report));
        country_means.push(agg.report);
    }
    let pooled: Vec<MetricsReport> = leaf.iter().filter(|r| r.country == ALL).map(ResultRow::report).collect();
    let overall = if pooled.is_empty() {
        aggregate(&country_means)
    } else {
        aggregate(&pooled)
    };
    out.push(row_from(key, ALL, MEAN, &overall.report));
    out
}

/// Mean over seeds of every `MEAN`-milestone row, keyed by country.
pub(crate) fn seed_mean_rows(runs: &[Vec<ResultRow>]) -> Vec<ResultRow> {
    let Some(first) = runs.first() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for template in first.iter().filter(|r| r.milestone == MEAN) {
        let reports: Vec<MetricsReport> = runs
            .iter()
            .filter_map(|rows| {
                rows.iter()
                    .find(|r| r.milestone == MEAN && r.country == template.country)
                    .map(ResultRow::report)
            })
            .collect();
        let agg = aggregate(&reports);
        let mut row = template.clone();
        let r = agg.report;
        row.mape = r.mape;
        row.mae = r.mae;
        row.rmse = r.rmse;
        row.seconds = round_seconds(r.wall_seconds);
        row.n_scored = r.n_scored;
        row.n_skipped = r.n_skipped_zero_target;
        row.seed = MEAN.to_string();
        out.push(row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(country: &str, milestone: &str, mape: f64) -> ResultRow {
        ResultRow {
            algorithm: "x".into(),
            mode: Mode::SingleCountry,
            scheme: Scheme::Holdout,
            country: country.into(),
            milestone: milestone.into(),
            mape: Some(mape),
            mae: mape,
            rmse: mape,
            seconds: 0.0,
            n_scored: 1,
            n_skipped: 0,
            seed: "1".into(),
        }
    }

    fn key() -> RunKey {
        RunKey {
            algorithm: "x".into(),
            mode: Mode::SingleCountry,
            scheme: Scheme::Holdout,
            seed: "1".into(),
        }
    }

    #[test]
    fn country_then_grand_means() {
        let rows = vec![leaf("A", "m1", 10.0), leaf("A", "m2", 30.0), leaf("B", "m1", 40.0)];
        let all = add_mean_rows(&key(), &rows, &["A".into(), "B".into()]);
        assert_eq!(all.len(), 6);
        assert_eq!(all[3].mape, Some(20.0));
        assert_eq!(all[4].mape, Some(40.0));
        assert_eq!(all[5].country, ALL);
        assert_eq!(all[5].mape, Some(30.0));
    }

    #[test]
    fn csv_round_trip_keeps_undefined_mape() {
        let mut r = leaf("A", "2020-01-01", 1.5);
        r.mape = None;
        let t = ResultsTable { rows: vec![r, leaf("B", MEAN, 2.0)] };
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "algorithm,mode,scheme,country,milestone,mape,mae,rmse,seconds,n_scored,n_skipped,seed\n"
        ));
        assert!(text.contains("x,SC,holdout,A,2020-01-01,,1.5,"));
        assert_eq!(ResultsTable::read_csv(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn seed_means_average_runs() {
        let mut a = leaf("A", MEAN, 10.0);
        let mut b = leaf("A", MEAN, 20.0);
        a.seed = "1".into();
        b.seed = "2".into();
        let rows = seed_mean_rows(&[vec![a], vec![b]]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].mape, Some(15.0));
        assert_eq!(rows[0].seed, MEAN);
    }
}
