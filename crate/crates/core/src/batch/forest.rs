//! Bagged regression trees with per-node attribute sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cart::{fit_cart_with_rng, CartParams, CartTree};
use super::{check_dim, validate_training};
use crate::model::{ModelError, Regressor};
use crate::snapshot::ModelSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Attributes per node; `None` uses `ceil(d / 3)`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: None,
            bootstrap: true,
            max_depth: None,
            min_samples_leaf: 1,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub trees: Vec<CartTree>,
}

impl ForestModel {
    pub fn new(params: ForestParams) -> Self {
        Self {
            params,
            trees: Vec::new(),
        }
    }

    /// Mean of the member trees, 0 before fitting.
    pub fn predict(&self, features: &[f64]) -> Result<f64, ModelError> {
        let Some(first) = self.trees.first() else {
            return Ok(0.0);
        };
        check_dim(first.dim, features.len())?;
        let sum: f64 = self.trees.iter().map(|t| t.predict_unchecked(features)).sum();
        Ok(sum / self.trees.len() as f64)
    }
}

/// Tree `k` draws from its own rng seeded by a master rng, so results do not
/// depend on the thread count.
pub fn fit_forest(rows: &[&[f64]], targets: &[f64], params: ForestParams) -> Result<ForestModel, ModelError> {
    let dim = validate_training(rows, targets)?;
    if params.n_trees == 0 {
        return Err(ModelError::Config("n_trees must be >= 1".into()));
    }
    let m = params.max_features.unwrap_or(dim.div_ceil(3)).clamp(1, dim.max(1));
    let cart = CartParams {
        max_depth: params.max_depth,
        min_samples_split: 2,
        min_samples_leaf: params.min_samples_leaf,
        max_features: Some(m),
    };
    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let seeds: Vec<u64> = (0..params.n_trees).map(|_| master.random()).collect();
    let n = rows.len();
    let trees = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            if params.bootstrap {
                let picks: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                let r: Vec<&[f64]> = picks.iter().map(|&i| rows[i]).collect();
                let t: Vec<f64> = picks.iter().map(|&i| targets[i]).collect();
                fit_cart_with_rng(&r, &t, cart, &mut rng)
            } else {
                fit_cart_with_rng(rows, targets, cart, &mut rng)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ForestModel { params, trees })
}

impl Regressor for ForestModel {
    fn fit(&mut self, rows: &[&[f64]], targets: &[f64]) -> Result<(), ModelError> {
        *self = fit_forest(rows, targets, self.params)?;
        Ok(())
    }

    fn predict_one(&self, features: &[f64]) -> Result<f64, ModelError> {
        self.predict(features)
    }

    fn snapshot(&self) -> Option<ModelSnapshot> {
        Some(ModelSnapshot::Forest(self.clone()))
    }
}
