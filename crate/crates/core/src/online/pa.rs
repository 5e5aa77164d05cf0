//! Passive-aggressive regression with the ε-insensitive loss.

use serde::{Deserialize, Serialize};

use crate::model::{check_finite, learn_all, Dimension, ModelError, Regressor};
use crate::snapshot::ModelSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaVariant {
    /// τ = loss / ‖x‖²
    Pa,
    /// τ = min(C, loss / ‖x‖²)
    PaI,
    /// τ = loss / (‖x‖² + 1/(2C))
    PaII,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PaConfig {
    pub variant: PaVariant,
    /// Aggressiveness C.
    pub c: f64,
    pub epsilon: f64,
    /// Learn a bias. The bias acts as a constant input of 1, so it adds 1 to
    /// ‖x‖² in the step size.
    pub fit_intercept: bool,
}

impl Default for PaConfig {
    fn default() -> Self {
        Self {
            variant: PaVariant::PaI,
            c: 1.0,
            epsilon: 0.1,
            fit_intercept: true,
        }
    }
}

/// What one update did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaStep {
    pub loss: f64,
    /// Step size applied; `None` when the model stayed unchanged.
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassiveAggressiveRegressor {
    config: PaConfig,
    dim: Dimension,
    weights: Vec<f64>,
    bias: f64,
    updates: u64,
    skipped_zero_norm: u64,
}

impl PassiveAggressiveRegressor {
    pub fn new(config: PaConfig) -> Result<Self, ModelError> {
        if !(config.epsilon >= 0.0) {
            return Err(ModelError::Config("epsilon must be non-negative".into()));
        }
        if config.variant != PaVariant::Pa && !(config.c > 0.0) {
            return Err(ModelError::Config("C must be positive".into()));
        }
        Ok(Self {
            config,
            dim: Dimension::default(),
            weights: Vec::new(),
            bias: 0.0,
            updates: 0,
            skipped_zero_norm: 0,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Updates skipped because the input had zero norm.
    pub fn skipped_zero_norm(&self) -> u64 {
        self.skipped_zero_norm
    }

    pub fn predict(&self, features: &[f64]) -> Result<f64, ModelError> {
        self.dim.check(features.len())?;
        Ok(self.raw_predict(features))
    }

    fn raw_predict(&self, x: &[f64]) -> f64 {
        self.bias
            + self
                .weights
                .iter()
                .zip(x)
                .map(|(w, v)| w * v)
                .sum::<f64>()
    }

    pub fn loss(&self, features: &[f64], target: f64) -> Result<f64, ModelError> {
        let pred = self.predict(features)?;
        Ok(((pred - target).abs() - self.config.epsilon).max(0.0))
    }

    pub fn update(&mut self, features: &[f64], target: f64) -> Result<PaStep, ModelError> {
        let dim = self.dim.bind(features.len())?;
        check_finite(features, target)?;
        if self.weights.is_empty() {
            self.weights = vec![0.0; dim];
        }
        let pred = self.raw_predict(features);
        let loss = ((target - pred).abs() - self.config.epsilon).max(0.0);
        if loss <= 0.0 {
            return Ok(PaStep { loss, tau: None });
        }
        let mut sq_norm: f64 = features.iter().map(|v| v * v).sum();
        if self.config.fit_intercept {
            sq_norm += 1.0;
        }
        if sq_norm == 0.0 {
            self.skipped_zero_norm += 1;
            return Ok(PaStep { loss, tau: None });
        }
        let c = self.config.c;
        let tau = match self.config.variant {
            PaVariant::Pa => loss / sq_norm,
            PaVariant::PaI => (loss / sq_norm).min(c),
            PaVariant::PaII => loss / (sq_norm + 1.0 / (2.0 * c)),
        };
        let signed = (target - pred).signum() * tau;
        for (w, v) in self.weights.iter_mut().zip(features) {
            *w += signed * v;
        }
        if self.config.fit_intercept {
            self.bias += signed;
        }
        self.updates += 1;
        Ok(PaStep {
            loss,
            tau: Some(tau),
        })
    }
}

impl Default for PassiveAggressiveRegressor {
    fn default() -> Self {
        Self::new(PaConfig::default()).expect("defaults are valid")
    }
}

impl Regressor for PassiveAggressiveRegressor {
    fn fit(&mut self, rows: &[&[f64]], targets: &[f64]) -> Result<(), ModelError> {
        learn_all(self, rows, targets)
    }

    fn predict_one(&self, features: &[f64]) -> Result<f64, ModelError> {
        self.predict(features)
    }

    fn learn_one(&mut self, features: &[f64], target: f64) -> Result<(), ModelError> {
        self.update(features, target).map(|_| ())
    }

    fn is_incremental(&self) -> bool {
        true
    }

    fn snapshot(&self) -> Option<ModelSnapshot> {
        Some(ModelSnapshot::PassiveAggressive(self.clone()))
    }
}
