//! Linear support vector regression trained by stochastic subgradient
//! descent on `½‖w‖² + C Σ max(0, |y − w·x − b| − ε)`.
//!
//! Features and target are standardized with fit-time statistics, so `ε` is
//! measured in target standard deviations. The step size for epoch `e` is
//! `η₀ / (1 + e)` with `η₀ = 1 / (mean ‖x‖² + 1)`, and the reported model is
//! the running average of all iterates.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, mean_and_sd, validate_training, Standardizer};
use crate::model::{ModelError, Regressor};
use crate::snapshot::ModelSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvrParams {
    pub c: f64,
    /// Tube half-width in target standard deviations.
    pub epsilon: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            epsilon: 0.1,
            epochs: 1000,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvrModel {
    pub params: SvrParams,
    /// Raw-unit weights and bias.
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Objective in standardized units after each epoch.
    pub objective: Vec<f64>,
}

impl LinearSvrModel {
    pub fn new(params: SvrParams) -> Self {
        Self {
            params,
            weights: Vec::new(),
            bias: 0.0,
            objective: Vec::new(),
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

fn objective(w: &[f64], b: f64, xs: &[Vec<f64>], ys: &[f64], c: f64, eps: f64) -> f64 {
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let p = b + w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
            ((y - p).abs() - eps).max(0.0)
        })
        .sum();
    reg + c * loss
}

pub fn fit_linear_svr(rows: &[&[f64]], targets: &[f64], params: SvrParams) -> Result<LinearSvrModel, ModelError> {
    let d = validate_training(rows, targets)?;
    if params.epochs == 0 || !(params.c > 0.0) || !(params.epsilon >= 0.0) {
        return Err(ModelError::Config(
            "epochs must be >= 1, C > 0 and epsilon >= 0".into(),
        ));
    }
    let n = rows.len();
    let scaler = Standardizer::fit(rows);
    let (y_mean, y_sd) = mean_and_sd(targets);
    if y_sd == 0.0 {
        return Ok(LinearSvrModel {
            params,
            weights: vec![0.0; d],
            bias: y_mean,
            objective: vec![0.0],
        });
    }
    let xs: Vec<Vec<f64>> = rows.iter().map(|r| scaler.transform(r)).collect();
    let ys: Vec<f64> = targets.iter().map(|t| (t - y_mean) / y_sd).collect();
    let (c, eps) = (params.c, params.epsilon);
    let lambda = 1.0 / (c * n as f64);
    let mean_sq = xs.iter().map(|x| x.iter().map(|v| v * v).sum::<f64>()).sum::<f64>() / n as f64;
    let eta0 = 1.0 / (mean_sq + 1.0);

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    // running average of the iterates, which is what gets reported
    let mut w_avg = vec![0.0; d];
    let mut b_avg = 0.0;
    let mut steps = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut trace = Vec::with_capacity(params.epochs);
    for epoch in 0..params.epochs {
        let eta = eta0 / (1.0 + epoch as f64);
        order.shuffle(&mut rng);
        for &i in &order {
            let x = &xs[i];
            let r = ys[i] - b - w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
            let shrink = 1.0 - eta * lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            if r.abs() > eps {
                let s = eta * r.signum();
                w.iter_mut().zip(x).for_each(|(a, v)| *a += s * v);
                b += s;
            }
            steps += 1.0;
            w_avg.iter_mut().zip(&w).for_each(|(a, v)| *a += (v - *a) / steps);
            b_avg += (b - b_avg) / steps;
        }
        trace.push(objective(&w_avg, b_avg, &xs, &ys, c, eps));
    }
    let b = b_avg;

    let weights: Vec<f64> = w_avg
        .iter()
        .zip(&scaler.std_devs)
        .map(|(v, sd)| if *sd > 0.0 { v * y_sd / sd } else { 0.0 })
        .collect();
    let bias = y_mean + b * y_sd
        - weights
            .iter()
            .zip(&scaler.means)
            .map(|(v, m)| v * m)
            .sum::<f64>();
    Ok(LinearSvrModel {
        params,
        weights,
        bias,
        objective: trace,
    })
}

impl Regressor for LinearSvrModel {
    fn fit(&mut self, rows: &[&[f64]], targets: &[f64]) -> Result<(), ModelError> {
        *self = fit_linear_svr(rows, targets, self.params)?;
        Ok(())
    }

    fn predict_one(&self, features: &[f64]) -> Result<f64, ModelError> {
        self.predict(features)
    }

    fn snapshot(&self) -> Option<ModelSnapshot> {
        Some(ModelSnapshot::LinearSvr(self.clone()))
    }
}
