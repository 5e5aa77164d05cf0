//! Least-squares gradient boosting over shallow regression trees.

use serde::{Deserialize, Serialize};

use super::cart::{fit_cart, CartParams, CartTree};
use super::{check_dim, validate_training};
use crate::model::{ModelError, Regressor};
use crate::snapshot::ModelSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbrtParams {
    pub n_stages: usize,
    pub learning_rate: f64,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

impl Default for GbrtParams {
    fn default() -> Self {
        Self {
            n_stages: 100,
            learning_rate: 0.1,
            max_depth: Some(3),
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbrtModel {
    pub params: GbrtParams,
    pub init: f64,
    pub stages: Vec<CartTree>,
    /// Training mean squared error after the initial constant and after each
    /// stage.
    pub train_mse: Vec<f64>,
}

impl GbrtModel {
    pub fn new(params: GbrtParams) -> Self {
        Self {
            params,
            init: 0.0,
            stages: Vec::new(),
            train_mse: Vec::new(),
        }
    }

    pub fn predict(&self, features: &[f64]) -> Result<f64, ModelError> {
        if let Some(first) = self.stages.first() {
            check_dim(first.dim, features.len())?;
        }
        Ok(self.init
            + self
                .stages
                .iter()
                .map(|t| self.params.learning_rate * t.predict_unchecked(features))
                .sum::<f64>())
    }
}

/// Each stage fits a tree to the current residuals and adds it scaled by the
/// learning rate.
pub fn fit_gbrt(rows: &[&[f64]], targets: &[f64], params: GbrtParams) -> Result<GbrtModel, ModelError> {
    validate_training(rows, targets)?;
    if !(params.learning_rate > 0.0) || params.n_stages == 0 {
        return Err(ModelError::Config(
            "n_stages must be >= 1 and learning_rate > 0".into(),
        ));
    }
    let n = targets.len() as f64;
    let init = targets.iter().sum::<f64>() / n;
    let mut fitted = vec![init; targets.len()];
    let mse = |f: &[f64]| f.iter().zip(targets).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n;
    let mut train_mse = vec![mse(&fitted)];
    let cart = CartParams {
        max_depth: params.max_depth,
        min_samples_leaf: params.min_samples_leaf,
        ..CartParams::default()
    };
    let mut stages = Vec::with_capacity(params.n_stages);
    for _ in 0..params.n_stages {
        let residuals: Vec<f64> = targets.iter().zip(&fitted).map(|(y, f)| y - f).collect();
        let tree = fit_cart(rows, &residuals, cart)?;
        for (f, r) in fitted.iter_mut().zip(rows) {
            *f += params.learning_rate * tree.predict_unchecked(r);
        }
        train_mse.push(mse(&fitted));
        stages.push(tree);
    }
    Ok(GbrtModel {
        params,
        init,
        stages,
        train_mse,
    })
}

impl Regressor for GbrtModel {
    fn fit(&mut self, rows: &[&[f64]], targets: &[f64]) -> Result<(), ModelError> {
        *self = fit_gbrt(rows, targets, self.params)?;
        Ok(())
    }

    fn predict_one(&self, features: &[f64]) -> Result<f64, ModelError> {
        self.predict(features)
    }

    fn snapshot(&self) -> Option<ModelSnapshot> {
        Some(ModelSnapshot::Gbrt(self.clone()))
    }
}
