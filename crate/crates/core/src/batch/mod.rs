//! Batch baselines, refit from scratch on every training split.

pub mod cart;
pub mod forest;
pub mod gbrt;
pub mod linear;
pub mod svr;

pub use cart::{fit_cart, CartParams, CartTree};
pub use forest::{fit_forest, ForestModel, ForestParams};
pub use gbrt::{fit_gbrt, GbrtModel, GbrtParams};
pub use linear::{fit_linear, LinearModel};
pub use svr::{fit_linear_svr, LinearSvrModel, SvrParams};

use serde::{Deserialize, Serialize};

use crate::model::ModelError;

/// Per-column mean and population standard deviation from fit-time data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub std_devs: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[&[f64]]) -> Self {
        let d = rows.first().map_or(0, |r| r.len());
        let n = rows.len() as f64;
        let mut means = vec![0.0; d];
        for r in rows {
            for (m, v) in means.iter_mut().zip(r.iter()) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut std_devs = vec![0.0; d];
        for r in rows {
            for ((s, m), v) in std_devs.iter_mut().zip(&means).zip(r.iter()) {
                *s += (v - m) * (v - m);
            }
        }
        std_devs.iter_mut().for_each(|s| *s = (*s / n).sqrt());
        Self { means, std_devs }
    }

    /// Zero for constant columns.
    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.std_devs))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}

pub(crate) fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Checks a training set: non-empty, matching lengths, rectangular, finite.
pub(crate) fn validate_training(rows: &[&[f64]], targets: &[f64]) -> Result<usize, ModelError> {
    if rows.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    if rows.len() != targets.len() {
        return Err(ModelError::Config(format!(
            "{} rows but {} targets",
            rows.len(),
            targets.len()
        )));
    }
    let d = rows[0].len();
    for r in rows {
        if r.len() != d {
            return Err(ModelError::DimensionMismatch {
                expected: d,
                got: r.len(),
            });
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
    }
    if targets.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    Ok(d)
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<(), ModelError> {
    if expected == got {
        Ok(())
    } else {
        Err(ModelError::DimensionMismatch { expected, got })
    }
}
