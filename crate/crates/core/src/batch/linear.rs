//! Least squares and ridge regression.
//!
//! Features and target are standardized with fit-time statistics, the
//! penalized normal equations `(XᵀX + λI) w = Xᵀy` are solved through the
//! SVD of the standardized design, and the solution is mapped back to raw
//! units. The bias is never penalized. Singular directions are dropped,
//! which yields the minimum-norm solution.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_dim, mean_and_sd, validate_training, Standardizer};
use crate::model::{ModelError, Regressor};
use crate::snapshot::ModelSnapshot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// λ, 0 for ordinary least squares.
    pub penalty: f64,
    /// Singular values dropped as numerically zero.
    pub dropped_directions: usize,
}

impl LinearModel {
    /// Unfitted model with the given penalty; fit before predicting.
    pub fn new(penalty: f64) -> Self {
        Self {
            weights: Vec::new(),
            bias: 0.0,
            penalty,
            dropped_directions: 0,
        }
    }

    pub fn predict(&self, features: &[f64]) -> Result<f64, ModelError> {
        check_dim(self.weights.len(), features.len())?;
        Ok(self.bias
            + self
                .weights
                .iter()
                .zip(features)
                .map(|(w, x)| w * x)
                .sum::<f64>())
    }
}

pub fn fit_linear(rows: &[&[f64]], targets: &[f64], penalty: f64) -> Result<LinearModel, ModelError> {
    let d = validate_training(rows, targets)?;
    if !(penalty >= 0.0) {
        return Err(ModelError::Config("penalty must be non-negative".into()));
    }
    let n = rows.len();
    let scaler = Standardizer::fit(rows);
    let (y_mean, y_sd) = mean_and_sd(targets);

    if y_sd == 0.0 || d == 0 {
        return Ok(LinearModel {
            weights: vec![0.0; d],
            bias: y_mean,
            penalty,
            dropped_directions: 0,
        });
    }

    let x = DMatrix::from_fn(n, d, |i, j| {
        let sd = scaler.std_devs[j];
        if sd > 0.0 {
            (rows[i][j] - scaler.means[j]) / sd
        } else {
            0.0
        }
    });
    let y = DVector::from_iterator(n, targets.iter().map(|t| (t - y_mean) / y_sd));

    let svd = x.svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let s_max = svd.singular_values.max();
    let tol = s_max * (n.max(d) as f64) * f64::EPSILON;
    let uty = u.transpose() * &y;

    let mut coef = DVector::<f64>::zeros(d);
    let mut dropped = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= tol {
            dropped += 1;
            continue;
        }
        let factor = s / (s * s + penalty) * uty[k];
        coef += v_t.row(k).transpose() * factor;
    }

    let weights: Vec<f64> = (0..d)
        .map(|j| {
            let sd = scaler.std_devs[j];
            if sd > 0.0 {
                coef[j] * y_sd / sd
            } else {
                0.0
            }
        })
        .collect();
    let bias = y_mean
        - weights
            .iter()
            .zip(&scaler.means)
            .map(|(w, m)| w * m)
            .sum::<f64>();
    if dropped > 0 {
        log::debug!("linear fit dropped {dropped} rank-deficient directions");
    }
    Ok(LinearModel {
        weights,
        bias,
        penalty,
        dropped_directions: dropped,
    })
}

impl Regressor for LinearModel {
    fn fit(&mut self, rows: &[&[f64]], targets: &[f64]) -> Result<(), ModelError> {
        *self = fit_linear(rows, targets, self.penalty)?;
        Ok(())
    }

    fn predict_one(&self, features: &[f64]) -> Result<f64, ModelError> {
        self.predict(features)
    }

    fn snapshot(&self) -> Option<ModelSnapshot> {
        Some(ModelSnapshot::Linear(self.clone()))
    }
}
