//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::fs::File;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use epistream::batch::cart::CartNode;
use epistream::batch::CartTree;
use epistream::experiment::RunConfig;
use epistream::ingest::{write_csv, CaseSeries};
use epistream::model::{ModelError, Regressor};
use epistream::synthetic::{synthetic_records, SyntheticSpec};

pub fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).unwrap()
}

/// Day values equal their 1-based index.
pub fn ramp(country: &str, start: NaiveDate, n: usize) -> CaseSeries {
    CaseSeries::new(country, start, (1..=n).map(|v| v as f64).collect())
}

/// Incremental in name only: learning never changes its predictions.
#[derive(Debug, Clone, Default)]
pub struct FrozenStub;

impl Regressor for FrozenStub {
    fn fit(&mut self, _rows: &[&[f64]], _targets: &[f64]) -> Result<(), ModelError> {
        Ok(())
    }

    fn predict_one(&self, features: &[f64]) -> Result<f64, ModelError> {
        let mean = features.iter().sum::<f64>() / features.len() as f64;
        Ok(0.9 * mean + 3.0)
    }

    fn learn_one(&mut self, _features: &[f64], _target: f64) -> Result<(), ModelError> {
        Ok(())
    }

    fn is_incremental(&self) -> bool {
        true
    }
}

fn sse(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean).powi(2)).sum()
}

/// Exhaustive search over every attribute and every midpoint between
/// adjacent distinct values, minimizing the children's summed squared error
/// computed from scratch. Ties keep the lowest attribute, then the lowest
/// threshold.
pub fn brute_force_split(rows: &[Vec<f64>], targets: &[f64], idx: &[usize]) -> Option<(usize, f64)> {
    brute_force_split_with(rows, targets, idx, |lo, hi| {
        let t = lo + (hi - lo) / 2.0;
        if t >= hi {
            lo
        } else {
            t
        }
    })
}

/// [`brute_force_split`] with a caller-supplied threshold between adjacent
/// distinct values.
pub fn brute_force_split_with(
    rows: &[Vec<f64>],
    targets: &[f64],
    idx: &[usize],
    midpoint: impl Fn(f64, f64) -> f64,
) -> Option<(usize, f64)> {
    let dim = rows[idx[0]].len();
    let mut best: Option<(f64, usize, f64)> = None;
    #[allow(clippy::needless_range_loop)]
    for a in 0..dim {
        let mut values: Vec<f64> = idx.iter().map(|&i| rows[i][a]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = midpoint(w[0], w[1]);
            let left: Vec<f64> = idx.iter().filter(|&&i| rows[i][a] <= t).map(|&i| targets[i]).collect();
            let right: Vec<f64> = idx.iter().filter(|&&i| rows[i][a] > t).map(|&i| targets[i]).collect();
            let cost = sse(&left) + sse(&right);
            if best.is_none_or(|b| cost < b.0) {
                best = Some((cost, a, t));
            }
        }
    }
    best.map(|b| (b.1, b.2))
}

/// Checks that every split in `tree` is the brute-force choice for the rows
/// reaching it, growing until nodes are pure. Returns the number of splits
/// checked or a description of the first disagreement.
pub fn check_cart_against_brute_force(tree: &CartTree, rows: &[Vec<f64>], targets: &[f64]) -> Result<usize, String> {
    fn walk(tree: &CartTree, node: usize, rows: &[Vec<f64>], targets: &[f64], idx: Vec<usize>) -> Result<usize, String> {
        let pure = idx.iter().all(|&i| targets[i] == targets[idx[0]]);
        let expected = if pure || idx.len() < 2 {
            None
        } else {
            brute_force_split(rows, targets, &idx)
        };
        match (&tree.nodes[node], expected) {
            (CartNode::Leaf { value, samples }, None) => {
                let mean = idx.iter().map(|&i| targets[i]).sum::<f64>() / idx.len() as f64;
                if *samples != idx.len() || (value - mean).abs() > 1e-9 * mean.abs().max(1.0) {
                    return Err(format!("leaf {node}: value {value} over {samples}, oracle {mean} over {}", idx.len()));
                }
                Ok(0)
            }
            (CartNode::Split { attribute, threshold, left, right }, Some((a, t))) => {
                if *attribute != a || *threshold != t {
                    return Err(format!("node {node}: split x[{attribute}] <= {threshold}, oracle x[{a}] <= {t}"));
                }
                let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][a] <= t);
                Ok(1 + walk(tree, *left, rows, targets, l)? + walk(tree, *right, rows, targets, r)?)
            }
            (n, e) => Err(format!("node {node}: tree has {n:?}, oracle split {e:?}")),
        }
    }
    walk(tree, 0, rows, targets, (0..rows.len()).collect())
}

/// The real daily file, from `EPISTREAM_ECDC_CSV` or `data/ecdc_daily.csv`
/// at the workspace root.
pub fn real_data_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("EPISTREAM_ECDC_CSV") {
        let p = PathBuf::from(p);
        return p.is_file().then_some(p);
    }
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/ecdc_daily.csv");
    p.is_file().then_some(p)
}

/// Writes a synthetic file into `dir` and returns a config pointing at it,
/// with timing off so outputs are byte-stable.
pub fn synthetic_config(dir: &Path, n_countries: usize) -> RunConfig {
    let path = dir.join("cases.csv");
    let spec = SyntheticSpec {
        n_countries,
        late_starters: 0,
        ..SyntheticSpec::default()
    };
    write_csv(&synthetic_records(&spec), File::create(&path).unwrap()).unwrap();
    let mut config = RunConfig::default();
    config.data.path = path;
    config.run.output_dir = dir.join("results");
    config.run.record_timing = false;
    config
}
