//! Run configuration: a TOML file with sections plus `key.path=value`
//! overrides from the command line.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::batch::{CartParams, ForestParams, GbrtParams, SvrParams};
use crate::ingest::ColumnMapping;
use crate::online::{ArfConfig, HoeffdingTreeConfig, PaConfig};
use crate::windowing::WindowParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// One model per country.
    #[serde(rename = "SC", alias = "sc")]
    SingleCountry,
    /// One model over all countries merged.
    #[serde(rename = "MC", alias = "mc")]
    MultiCountry,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Self::SingleCountry => "SC",
            Self::MultiCountry => "MC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Holdout,
    Prequential,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Self::Holdout => "holdout",
            Self::Prequential => "prequential",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub window: WindowParams,
    pub milestones: MilestoneConfig,
    pub run: RunSection,
    pub algorithms: AlgorithmParams,
    pub significance: SignificanceConfig,
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub path: PathBuf,
    pub columns: ColumnMapping,
    /// Cumulative counts and eligibility are measured up to this date.
    pub selection_date: NaiveDate,
    pub min_months: u32,
    pub top_k: usize,
    /// Explicit country list (names or geo ids) replacing the ranking.
    pub countries: Option<Vec<String>>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            path: PathBuf::from("data/ecdc_daily.csv"),
            columns: ColumnMapping::default(),
            selection_date: date(2020, 11, 30),
            min_months: 8,
            top_k: 50,
            countries: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MilestoneConfig {
    pub count: usize,
    pub test_span_days: u32,
    pub final_milestone: NaiveDate,
}

impl Default for MilestoneConfig {
    fn default() -> Self {
        Self {
            count: 8,
            test_span_days: 30,
            final_milestone: date(2020, 10, 31),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Defaults per experiment: SC for exp1, MC for exp2 and exp3.
    pub mode: Option<Mode>,
    /// Defaults per experiment: holdout for exp1 and exp2, prequential for
    /// exp3.
    pub scheme: Option<Scheme>,
    /// Defaults to every algorithm (online learners only for exp3).
    pub algorithms: Option<Vec<String>>,
    /// Stochastic algorithms run once per seed; the rest run once with the
    /// first seed.
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// When false every `seconds` value is written as 0 so that repeated
    /// runs produce byte-identical files.
    pub record_timing: bool,
    /// Save a model snapshot after every milestone fit.
    pub checkpoints: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            mode: None,
            scheme: None,
            algorithms: None,
            seeds: vec![1, 2, 3],
            output_dir: PathBuf::from("results"),
            record_timing: true,
            checkpoints: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RidgeParams {
    pub penalty: f64,
}

impl Default for RidgeParams {
    fn default() -> Self {
        Self { penalty: 1.0 }
    }
}

/// Per-algorithm parameters. Seeds inside these sections are replaced by
/// the run seed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmParams {
    pub ht: HoeffdingTreeConfig,
    pub hat: HoeffdingTreeConfig,
    pub arf: ArfConfig,
    pub pa: PaConfig,
    pub ridge: RidgeParams,
    pub cart: CartParams,
    pub forest: ForestParams,
    pub gbrt: GbrtParams,
    pub svr: SvrParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignificanceConfig {
    /// Algorithm pairs to compare. Empty compares every pair.
    pub pairs: Vec<[String; 2]>,
    /// Level at which both samples must look normal for the t test.
    pub normality_alpha: f64,
    /// Results file read by the `significance` command.
    pub results: Option<PathBuf>,
}

impl Default for SignificanceConfig {
    fn default() -> Self {
        Self {
            pairs: Vec::new(),
            normality_alpha: 0.05,
            results: None,
        }
    }
}

impl RunConfig {
    /// Reads `path` (when given), applies `overrides`, and validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ExperimentError> {
        let mut table = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| {
                    ExperimentError::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                text.parse::<toml::Table>()
                    .map_err(|e| ExperimentError::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(table)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ExperimentError> {
        let table = text
            .parse::<toml::Table>()
            .map_err(|e| ExperimentError::Config(e.to_string()))?;
        Self::from_table(table)
    }

    fn from_table(mut table: toml::Table) -> Result<Self, ExperimentError> {
        dates_to_strings(&mut table);
        let config: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| ExperimentError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |key: &str, why: &str| Err(ExperimentError::Config(format!("{key}: {why}")));
        if self.window.window == 0 || self.window.horizon == 0 || self.window.avg_len == 0 {
            return bad("window", "window, horizon and avg_len must be at least 1");
        }
        if self.milestones.count == 0 {
            return bad("milestones.count", "must be at least 1");
        }
        if self.milestones.test_span_days == 0 {
            return bad("milestones.test_span_days", "must be at least 1");
        }
        if self.run.seeds.is_empty() {
            return bad("run.seeds", "at least one seed is required");
        }
        if self.run.algorithms.as_ref().is_some_and(Vec::is_empty) {
            return bad("run.algorithms", "roster is empty");
        }
        if !(self.significance.normality_alpha > 0.0 && self.significance.normality_alpha < 1.0) {
            return bad("significance.normality_alpha", "must be in (0, 1)");
        }
        Ok(())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Bare TOML dates become strings so they deserialize like quoted ones.
fn dates_to_strings(table: &mut toml::Table) {
    fn walk(v: &mut toml::Value) {
        match v {
            toml::Value::Datetime(d) => *v = toml::Value::String(d.to_string()),
            toml::Value::Table(t) => t.iter_mut().for_each(|(_, x)| walk(x)),
            toml::Value::Array(a) => a.iter_mut().for_each(walk),
            _ => {}
        }
    }
    table.iter_mut().for_each(|(_, x)| walk(x));
}

/// `a.b.c=value`. The value is read as a TOML value when it parses as one
/// and as a bare string otherwise.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ExperimentError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| ExperimentError::Config(format!("override {spec:?} is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ExperimentError::Config(format!("override key {key:?} is malformed")));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry.as_table_mut().ok_or_else(|| {
            ExperimentError::Config(format!("override {key}: {part} is not a section"))
        })?;
    }
    node.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
