//! The three experiments.
//!
//! Work is split into independent units of (algorithm, seed, country or
//! all countries, milestone). Each unit builds a fresh model, so results do
//! not depend on the number of worker threads.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Mode, RunConfig, Scheme};
use super::dataset::Dataset;
use super::output::Manifest;
use super::registry::{AlgorithmInfo, ModelFactory, ALL_ALGORITHMS, ONLINE_ALGORITHMS};
use super::results::{add_mean_rows, row_from, seed_mean_rows, ResultRow, ResultsTable, RunKey, ALL};
use super::significance::{run_significance, SignificanceOutcome};
use super::ExperimentError;
use crate::evaluate::{holdout_scored, prequential_scored, MetricsReport, ScoreWindow, ScoredRun};
use crate::snapshot::snapshot_of;
use crate::windowing::Split;

pub const WORKERS_ENV: &str = "EPISTREAM_WORKERS";

/// Thread pool sized by `EPISTREAM_WORKERS`, or one thread per core.
pub fn worker_pool() -> Result<rayon::ThreadPool, ExperimentError> {
    let n = match std::env::var(WORKERS_ENV) {
        Ok(v) => v.trim().parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(|| {
            ExperimentError::Config(format!("{WORKERS_ENV}={v:?} is not a positive integer"))
        })?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| ExperimentError::Io(format!("cannot start worker pool: {e}")))
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    /// `exp1`, `exp2` or `exp3`.
    pub name: String,
    pub table: ResultsTable,
    pub manifest: Manifest,
}

struct Roster {
    entries: Vec<(String, AlgorithmInfo)>,
}

fn resolve_roster(
    config: &RunConfig,
    factory: &dyn ModelFactory,
    default: &[&str],
    need_incremental: bool,
) -> Result<Roster, ExperimentError> {
    let names: Vec<String> = match &config.run.algorithms {
        Some(list) => list.clone(),
        None => default.iter().map(|s| s.to_string()).collect(),
    };
    let mut entries: Vec<(String, AlgorithmInfo)> = Vec::new();
    for name in names {
        let info = factory
            .info(&name)
            .ok_or_else(|| ExperimentError::Config(format!("run.algorithms: unknown algorithm {name:?}")))?;
        if need_incremental && !info.incremental {
            return Err(ExperimentError::Config(format!(
                "run.algorithms: prequential requires incremental update support, {name:?} is a batch learner"
            )));
        }
        if entries.iter().any(|(n, _)| n == &name) {
            return Err(ExperimentError::Config(format!("run.algorithms: {name:?} listed twice")));
        }
        entries.push((name, info));
    }
    Ok(Roster { entries })
}

fn seeds_for(config: &RunConfig, info: AlgorithmInfo) -> Vec<u64> {
    if info.stochastic {
        config.run.seeds.clone()
    } else {
        vec![config.run.seeds[0]]
    }
}

fn expect_setting<T: PartialEq + Copy + std::fmt::Debug>(
    key: &str,
    configured: Option<T>,
    required: T,
    experiment: &str,
) -> Result<(), ExperimentError> {
    match configured {
        Some(v) if v != required => Err(ExperimentError::Config(format!(
            "{key}: {experiment} runs with {required:?}, config says {v:?}"
        ))),
        _ => Ok(()),
    }
}

/// One split evaluated by one model.
#[derive(Clone, Copy)]
struct Unit<'a> {
    algorithm: &'a str,
    seed: u64,
    /// Country index in single-country mode, `None` for all countries.
    country: Option<usize>,
    milestone: usize,
}

struct UnitResult {
    holdout: Option<ScoredRun>,
    prequential: Option<ScoredRun>,
}

struct Context<'a> {
    data: &'a Dataset,
    factory: &'a dyn ModelFactory,
    mode: Mode,
    schemes: &'a [Scheme],
    /// `splits[country][milestone]` in SC mode, `splits[0][milestone]` in MC.
    splits: Vec<Vec<Split>>,
    checkpoint_dir: Option<PathBuf>,
}

impl Context<'_> {
    fn split(&self, unit: &Unit) -> &Split {
        &self.splits[unit.country.unwrap_or(0)][unit.milestone]
    }

    fn scope_label(&self, unit: &Unit) -> &str {
        unit.country.map_or(ALL, |c| self.data.countries[c].as_str())
    }

    fn run_unit(&self, unit: &Unit) -> Result<UnitResult, ExperimentError> {
        let split = self.split(unit);
        let mut out = UnitResult {
            holdout: None,
            prequential: None,
        };
        for &scheme in self.schemes {
            let mut model = self.factory.build(unit.algorithm, unit.seed)?;
            match scheme {
                Scheme::Holdout => {
                    let run = holdout_scored(model.as_mut(), &split.train, &split.test)?;
                    if let Some(dir) = &self.checkpoint_dir {
                        self.save_checkpoint(dir, unit, model.as_ref())?;
                    }
                    out.holdout = Some(run);
                }
                Scheme::Prequential => {
                    let window =
                        ScoreWindow::after_milestone(split.milestone, self.data.schedule.test_span_days);
                    out.prequential =
                        Some(prequential_scored(model.as_mut(), &split.train, &split.test, window)?);
                }
            }
        }
        Ok(out)
    }

    fn save_checkpoint(
        &self,
        dir: &Path,
        unit: &Unit,
        model: &dyn crate::model::Regressor,
    ) -> Result<(), ExperimentError> {
        let Ok(snap) = snapshot_of(model) else {
            return Ok(());
        };
        let scope: String = self
            .scope_label(unit)
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        let name = format!(
            "{}-{}-{}-{}-s{}.json",
            unit.algorithm,
            self.mode.label(),
            scope,
            self.split(unit).milestone,
            unit.seed
        );
        snap.save(&dir.join(name))
            .map_err(|e| ExperimentError::Io(format!("checkpoint: {e}")))
    }
}

fn timed(report: MetricsReport, record_timing: bool) -> MetricsReport {
    if record_timing {
        report
    } else {
        MetricsReport {
            wall_seconds: 0.0,
            ..report
        }
    }
}

fn run_generic(
    name: &str,
    config: &RunConfig,
    data: &Dataset,
    factory: &dyn ModelFactory,
    mode: Mode,
    schemes: &[Scheme],
    roster: Roster,
) -> Result<ExperimentOutput, ExperimentError> {
    let milestones: Vec<NaiveDate> = data.milestones().to_vec();
    let splits: Vec<Vec<Split>> = match mode {
        Mode::SingleCountry => data
            .countries
            .iter()
            .map(|c| milestones.iter().map(|&m| data.country_split(c, m)).collect())
            .collect(),
        Mode::MultiCountry => vec![milestones.iter().map(|&m| data.merged_split(m)).collect()],
    };
    let checkpoint_dir = if config.run.checkpoints {
        let dir = config.run.output_dir.join(name).join("checkpoints");
        fs::create_dir_all(&dir)?;
        Some(dir)
    } else {
        None
    };
    let ctx = Context {
        data,
        factory,
        mode,
        schemes,
        splits,
        checkpoint_dir,
    };

    let scopes: Vec<Option<usize>> = match mode {
        Mode::SingleCountry => (0..data.countries.len()).map(Some).collect(),
        Mode::MultiCountry => vec![None],
    };
    let mut units = Vec::new();
    let mut skipped = Vec::new();
    for (algorithm, info) in &roster.entries {
        for seed in seeds_for(config, *info) {
            for &country in &scopes {
                for milestone in 0..milestones.len() {
                    let unit = Unit {
                        algorithm,
                        seed,
                        country,
                        milestone,
                    };
                    let split = ctx.split(&unit);
                    if split.train.is_empty() || split.test.is_empty() {
                        // only reported once per scope and milestone
                        if algorithm == &roster.entries[0].0 && seed == seeds_for(config, *info)[0] {
                            skipped.push(format!(
                                "{} at {}: {} train / {} test examples",
                                ctx.scope_label(&unit),
                                split.milestone,
                                split.train.len(),
                                split.test.len()
                            ));
                        }
                        continue;
                    }
                    units.push(unit);
                }
            }
        }
    }
    for s in &skipped {
        log::warn!("{name}: skipped {s}");
    }

    let pool = worker_pool()?;
    let results: Vec<UnitResult> =
        pool.install(|| units.par_iter().map(|u| ctx.run_unit(u)).collect::<Result<_, _>>())?;

    // rows per (algorithm, scheme, seed)
    let record_timing = config.run.record_timing;
    let mut rows: Vec<ResultRow> = Vec::new();
    for (algorithm, info) in &roster.entries {
        for &scheme in schemes {
            let mut per_seed: Vec<Vec<ResultRow>> = Vec::new();
            for seed in seeds_for(config, *info) {
                let key = RunKey {
                    algorithm: algorithm.clone(),
                    mode,
                    scheme,
                    seed: seed.to_string(),
                };
                let mut leaf = Vec::new();
                let mut breakdown = Vec::new();
                for (unit, result) in units.iter().zip(&results) {
                    if unit.algorithm != algorithm || unit.seed != seed {
                        continue;
                    }
                    let run = match scheme {
                        Scheme::Holdout => result.holdout.as_ref(),
                        Scheme::Prequential => result.prequential.as_ref(),
                    }
                    .expect("scheme was run");
                    let split = ctx.split(unit);
                    let milestone = split.milestone.to_string();
                    leaf.push(row_from(
                        &key,
                        ctx.scope_label(unit),
                        &milestone,
                        &timed(run.report(), record_timing),
                    ));
                    if mode == Mode::MultiCountry {
                        for c in &data.countries {
                            let r = run.report_where(|i| &split.test[i].country == c);
                            if !r.is_empty() {
                                breakdown.push(row_from(&key, c, &milestone, &timed(r, record_timing)));
                            }
                        }
                    }
                }
                // per-country rows first, then the pooled ones
                breakdown.sort_by_key(|r| {
                    data.countries.iter().position(|c| c == &r.country).expect("known country")
                });
                breakdown.extend(leaf);
                per_seed.push(add_mean_rows(&key, &breakdown, &data.countries));
            }
            let seed_means = if per_seed.len() > 1 {
                seed_mean_rows(&per_seed)
            } else {
                Vec::new()
            };
            rows.extend(per_seed.into_iter().flatten());
            rows.extend(seed_means);
        }
    }

    let table = ResultsTable { rows };
    let manifest = Manifest::new(name, config, data, factory, &roster.entries, mode, schemes, skipped);
    Ok(ExperimentOutput {
        name: name.to_string(),
        table,
        manifest,
    })
}

/// Single-country hold-out: one model per (country, milestone, algorithm,
/// seed).
pub fn run_experiment_1(
    config: &RunConfig,
    data: &Dataset,
    factory: &dyn ModelFactory,
) -> Result<ExperimentOutput, ExperimentError> {
    expect_setting("run.mode", config.run.mode, Mode::SingleCountry, "exp1")?;
    expect_setting("run.scheme", config.run.scheme, Scheme::Holdout, "exp1")?;
    let roster = resolve_roster(config, factory, &ALL_ALGORITHMS, false)?;
    run_generic("exp1", config, data, factory, Mode::SingleCountry, &[Scheme::Holdout], roster)
}

/// Multi-country hold-out: one model per (milestone, algorithm, seed)
/// trained on all countries merged. Per-country rows break the pooled test
/// predictions down by country.
pub fn run_experiment_2(
    config: &RunConfig,
    data: &Dataset,
    factory: &dyn ModelFactory,
) -> Result<ExperimentOutput, ExperimentError> {
    expect_setting("run.mode", config.run.mode, Mode::MultiCountry, "exp2")?;
    expect_setting("run.scheme", config.run.scheme, Scheme::Holdout, "exp2")?;
    let roster = resolve_roster(config, factory, &ALL_ALGORITHMS, false)?;
    run_generic("exp2", config, data, factory, Mode::MultiCountry, &[Scheme::Holdout], roster)
}

/// Prequential evaluation of the online learners with paired hold-out rows.
/// Runs in multi-country mode unless `run.mode` says otherwise.
pub fn run_experiment_3(
    config: &RunConfig,
    data: &Dataset,
    factory: &dyn ModelFactory,
) -> Result<ExperimentOutput, ExperimentError> {
    expect_setting("run.scheme", config.run.scheme, Scheme::Prequential, "exp3")?;
    let mode = config.run.mode.unwrap_or(Mode::MultiCountry);
    let roster = resolve_roster(config, factory, &ONLINE_ALGORITHMS, true)?;
    run_generic(
        "exp3",
        config,
        data,
        factory,
        mode,
        &[Scheme::Holdout, Scheme::Prequential],
        roster,
    )
}

/// Median over countries of each algorithm's per-country MAPE, in both
/// modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeComparison {
    pub algorithm: String,
    pub sc_median_mape: Option<f64>,
    pub mc_median_mape: Option<f64>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

pub fn compare_modes(sc: &ResultsTable, mc: &ResultsTable) -> Vec<ModeComparison> {
    let mut algorithms: Vec<String> = sc.groups().into_iter().map(|g| g.0).collect();
    algorithms.dedup();
    algorithms
        .into_iter()
        .map(|a| ModeComparison {
            sc_median_mape: median(
                sc.country_mapes(&a, Mode::SingleCountry, Scheme::Holdout)
                    .into_values()
                    .collect(),
            ),
            mc_median_mape: median(
                mc.country_mapes(&a, Mode::MultiCountry, Scheme::Holdout)
                    .into_values()
                    .collect(),
            ),
            algorithm: a,
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct AllOutput {
    pub exp1: ExperimentOutput,
    pub exp2: ExperimentOutput,
    pub exp3: ExperimentOutput,
    pub significance: Vec<SignificanceOutcome>,
    pub modes: Vec<ModeComparison>,
}

/// Runs the three experiments and the significance tests on the first two.
/// The roster for exp3 keeps only the incremental algorithms.
pub fn run_all(
    config: &RunConfig,
    data: &Dataset,
    factory: &dyn ModelFactory,
) -> Result<AllOutput, ExperimentError> {
    let mut base = config.clone();
    base.run.mode = None;
    base.run.scheme = None;
    let exp1 = run_experiment_1(&base, data, factory)?;
    let exp2 = run_experiment_2(&base, data, factory)?;
    let mut online = base.clone();
    if let Some(list) = &base.run.algorithms {
        let kept: Vec<String> = list
            .iter()
            .filter(|a| factory.info(a).is_some_and(|i| i.incremental))
            .cloned()
            .collect();
        online.run.algorithms = if kept.is_empty() { None } else { Some(kept) };
    }
    let exp3 = run_experiment_3(&online, data, factory)?;
    let pairs = significance_pairs(config, &exp1.table);
    let mut significance = run_significance(&exp1.table, &pairs, config.significance.normality_alpha);
    significance.extend(run_significance(&exp2.table, &pairs, config.significance.normality_alpha));
    let modes = compare_modes(&exp1.table, &exp2.table);
    Ok(AllOutput {
        exp1,
        exp2,
        exp3,
        significance,
        modes,
    })
}

/// Configured pairs, or every pair of algorithms in `table`.
pub fn significance_pairs(config: &RunConfig, table: &ResultsTable) -> Vec<(String, String)> {
    if !config.significance.pairs.is_empty() {
        return config
            .significance
            .pairs
            .iter()
            .map(|[a, b]| (a.clone(), b.clone()))
            .collect();
    }
    let mut names: Vec<String> = table.groups().into_iter().map(|g| g.0).collect();
    names.dedup();
    let mut pairs = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            pairs.push((names[i].clone(), names[j].clone()));
        }
    }
    pairs
}
