//! Maps roster names to fresh model instances.

use serde::{Deserialize, Serialize};

use super::config::AlgorithmParams;
use crate::batch::{CartTree, ForestModel, ForestParams, GbrtModel, LinearModel, LinearSvrModel, SvrParams};
use crate::model::{ModelError, Regressor};
use crate::online::{
    AdaptiveRandomForestRegressor, ArfConfig, HoeffdingAdaptiveTreeRegressor, HoeffdingTreeConfig,
    HoeffdingTreeRegressor, PassiveAggressiveRegressor,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgorithmInfo {
    /// Supports `learn_one`, which prequential evaluation needs.
    pub incremental: bool,
    /// Output depends on the seed, so it runs once per configured seed.
    pub stochastic: bool,
}

/// Source of models for the experiment runners. Tests can supply their own
/// to inject stub models.
pub trait ModelFactory: Sync {
    /// `None` for names this factory does not know.
    fn info(&self, name: &str) -> Option<AlgorithmInfo>;

    fn build(&self, name: &str, seed: u64) -> Result<Box<dyn Regressor>, ModelError>;
}

pub const ONLINE_ALGORITHMS: [&str; 4] = ["arf", "hat", "ht", "pa"];
pub const ALL_ALGORITHMS: [&str; 10] = [
    "arf", "hat", "ht", "pa", "ols", "ridge", "cart", "forest", "gbrt", "svr",
];

/// The built-in learners configured from the `[algorithms]` section.
#[derive(Debug, Clone, Default)]
pub struct DefaultFactory {
    pub params: AlgorithmParams,
}

impl DefaultFactory {
    pub fn new(params: AlgorithmParams) -> Self {
        Self { params }
    }
}

impl ModelFactory for DefaultFactory {
    fn info(&self, name: &str) -> Option<AlgorithmInfo> {
        let (incremental, stochastic) = match name {
            "ht" | "hat" | "pa" => (true, false),
            "arf" => (true, true),
            "ols" | "ridge" | "cart" | "gbrt" => (false, false),
            "forest" | "svr" => (false, true),
            _ => return None,
        };
        Some(AlgorithmInfo {
            incremental,
            stochastic,
        })
    }

    fn build(&self, name: &str, seed: u64) -> Result<Box<dyn Regressor>, ModelError> {
        let p = &self.params;
        let tree = |c: &HoeffdingTreeConfig| HoeffdingTreeConfig {
            seed,
            ..c.clone()
        };
        Ok(match name {
            "ht" => Box::new(HoeffdingTreeRegressor::new(tree(&p.ht))?),
            "hat" => Box::new(HoeffdingAdaptiveTreeRegressor::new(tree(&p.hat))?),
            "arf" => Box::new(AdaptiveRandomForestRegressor::new(ArfConfig {
                seed,
                ..p.arf.clone()
            })?),
            "pa" => Box::new(PassiveAggressiveRegressor::new(p.pa.clone())?),
            "ols" => Box::new(LinearModel::new(0.0)),
            "ridge" => Box::new(LinearModel::new(p.ridge.penalty)),
            "cart" => Box::new(CartTree::new(p.cart)),
            "forest" => Box::new(ForestModel::new(ForestParams { seed, ..p.forest })),
            "gbrt" => Box::new(GbrtModel::new(p.gbrt)),
            "svr" => Box::new(LinearSvrModel::new(SvrParams { seed, ..p.svr })),
            other => return Err(ModelError::Config(format!("unknown algorithm {other:?}"))),
        })
    }
}
