//! Result files: the results table, a summary ordered by MAPE, long-format
//! plot data, and a JSON manifest that echoes the resolved configuration.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::config::{Mode, RunConfig, Scheme};
use super::dataset::Dataset;
use super::registry::{AlgorithmInfo, ModelFactory};
use super::results::{ResultsTable, ALL, MEAN};
use super::runner::{ExperimentOutput, ModeComparison};
use super::significance::{SignificanceOutcome, SignificanceRow};
use super::ExperimentError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub algorithm: String,
    pub incremental: bool,
    pub stochastic: bool,
    pub seeds: Vec<u64>,
}

/// Everything needed to rerun an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub mode: Mode,
    pub schemes: Vec<Scheme>,
    /// The configuration with every default filled in.
    pub config: RunConfig,
    pub roster: Vec<RosterEntry>,
    pub countries: Vec<String>,
    pub eligible_countries: Option<usize>,
    pub milestones: Vec<NaiveDate>,
    /// (scope, milestone) pairs left out for lack of train or test data.
    pub skipped: Vec<String>,
    pub notes: Vec<String>,
    pub files: Vec<String>,
}

impl Manifest {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        experiment: &str,
        config: &RunConfig,
        data: &Dataset,
        _factory: &dyn ModelFactory,
        roster: &[(String, AlgorithmInfo)],
        mode: Mode,
        schemes: &[Scheme],
        skipped: Vec<String>,
    ) -> Self {
        let roster: Vec<RosterEntry> = roster
            .iter()
            .map(|(a, info)| RosterEntry {
                algorithm: a.clone(),
                incremental: info.incremental,
                stochastic: info.stochastic,
                seeds: if info.stochastic {
                    config.run.seeds.clone()
                } else {
                    vec![config.run.seeds[0]]
                },
            })
            .collect();
        let mut notes = Vec::new();
        if roster.iter().any(|r| r.algorithm == "ridge") {
            notes.push(format!(
                "ridge uses a fixed penalty ({}) in place of Bayesian ridge",
                config.algorithms.ridge.penalty
            ));
        }
        if roster.iter().any(|r| r.algorithm == "arf") {
            notes.push("arf combines members by an unweighted mean".to_string());
        }
        if mode == Mode::MultiCountry {
            notes.push(
                "ALL rows pool every country's test examples; per-country rows break the same predictions down"
                    .to_string(),
            );
        }
        if !config.run.record_timing {
            notes.push("timing disabled: seconds are written as 0".to_string());
        }
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: experiment.to_string(),
            mode,
            schemes: schemes.to_vec(),
            config: config.clone(),
            roster,
            countries: data.countries.clone(),
            eligible_countries: data.selection.as_ref().map(|s| s.eligible_count),
            milestones: data.milestones().to_vec(),
            skipped,
            notes,
            files: Vec::new(),
        }
    }
}

#[derive(Debug, Serialize)]
struct CountryPoint<'a> {
    algorithm: &'a str,
    scheme: Scheme,
    country: &'a str,
    mape: f64,
}

#[derive(Debug, Serialize)]
struct MilestonePoint<'a> {
    algorithm: &'a str,
    scheme: Scheme,
    milestone: &'a str,
    mape: f64,
}

/// Per-country MAPE for box plots.
fn country_points(table: &ResultsTable) -> Vec<CountryPoint<'_>> {
    let mut out = Vec::new();
    for (a, mode, scheme) in table.groups() {
        for (country, mape) in table.country_mapes(&a, mode, scheme) {
            let algorithm = table
                .rows
                .iter()
                .find(|r| r.algorithm == a)
                .map(|r| r.algorithm.as_str())
                .expect("group exists");
            let country = table
                .rows
                .iter()
                .find(|r| r.country == country)
                .map(|r| r.country.as_str())
                .expect("country exists");
            out.push(CountryPoint {
                algorithm,
                scheme,
                country,
                mape,
            });
        }
    }
    out
}

/// MAPE per milestone: the pooled row in multi-country mode, the mean over
/// countries otherwise, averaged over seeds.
fn milestone_points(table: &ResultsTable) -> Vec<MilestonePoint<'_>> {
    let mut sums: BTreeMap<(usize, Scheme, &str), (f64, usize)> = BTreeMap::new();
    let mut order: Vec<&str> = Vec::new();
    let pooled = table.rows.iter().any(|r| r.country == ALL && r.milestone != MEAN);
    for r in table.leaf_rows() {
        if pooled != (r.country == ALL) {
            continue;
        }
        let Some(m) = r.mape else { continue };
        let idx = match order.iter().position(|a| *a == r.algorithm) {
            Some(i) => i,
            None => {
                order.push(&r.algorithm);
                order.len() - 1
            }
        };
        let e = sums.entry((idx, r.scheme, r.milestone.as_str())).or_insert((0.0, 0));
        e.0 += m;
        e.1 += 1;
    }
    sums.into_iter()
        .map(|((idx, scheme, milestone), (s, n))| MilestonePoint {
            algorithm: order[idx],
            scheme,
            milestone,
            mape: s / n as f64,
        })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `results.csv`, `summary.csv`, `plot_countries.csv`,
/// `plot_milestones.csv` and `manifest.json` into `dir`.
pub fn write_experiment(dir: &Path, output: &ExperimentOutput) -> Result<Manifest, ExperimentError> {
    fs::create_dir_all(dir)?;
    output
        .table
        .write_csv(BufWriter::new(File::create(dir.join("results.csv"))?))?;
    let summary = ResultsTable {
        rows: output.table.summary().into_iter().cloned().collect(),
    };
    summary.write_csv(BufWriter::new(File::create(dir.join("summary.csv"))?))?;
    write_rows(
        &dir.join("plot_countries.csv"),
        &country_points(&output.table),
        &["algorithm", "scheme", "country", "mape"],
    )?;
    write_rows(
        &dir.join("plot_milestones.csv"),
        &milestone_points(&output.table),
        &["algorithm", "scheme", "milestone", "mape"],
    )?;
    let mut manifest = output.manifest.clone();
    manifest.files = ["results.csv", "summary.csv", "plot_countries.csv", "plot_milestones.csv"]
        .map(String::from)
        .to_vec();
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(dir.join("manifest.json"), json + "\n")?;
    Ok(manifest)
}

pub fn write_significance(path: &Path, outcomes: &[SignificanceOutcome]) -> Result<(), ExperimentError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let rows: Vec<SignificanceRow> = outcomes.iter().map(SignificanceRow::from).collect();
    write_rows(path, &rows, &["algorithm_a", "algorithm_b", "mode", "scheme", "n", "test", "p_value"])
}

pub fn write_mode_comparison(path: &Path, rows: &[ModeComparison]) -> Result<(), ExperimentError> {
    write_rows(path, rows, &["algorithm", "sc_median_mape", "mc_median_mape"])
}
