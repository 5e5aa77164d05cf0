//! Adaptive random forest for regression.
//!
//! Each member is a Hoeffding tree whose leaves split on a random subset of
//! attributes. Members learn every example with a Poisson-drawn weight and
//! carry two ADWIN detectors over their absolute error: a warning starts a
//! background tree, a drift swaps the member for its background tree (or a
//! fresh one). The forest predicts the mean of its members.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::adwin::Adwin;
use super::hoeffding::{HoeffdingTreeConfig, HoeffdingTreeRegressor};
use crate::model::{check_finite, learn_all, Dimension, ModelError, Regressor};
use crate::snapshot::ModelSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    /// ⌈√d⌉
    Sqrt,
    All,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, dim: usize) -> usize {
        match self {
            MaxFeatures::Sqrt => ((dim as f64).sqrt().ceil() as usize).max(1),
            MaxFeatures::All => dim,
            MaxFeatures::Count(n) => n.clamp(1, dim.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArfConfig {
    pub ensemble_size: usize,
    /// λ of the per-member Poisson weights. `None` gives every member weight 1.
    pub poisson_lambda: Option<f64>,
    pub max_features: MaxFeatures,
    /// `None` disables the detector.
    pub warning_delta: Option<f64>,
    pub drift_delta: Option<f64>,
    /// Member tree settings; `max_features` and `seed` are set per member.
    pub tree: HoeffdingTreeConfig,
    pub seed: u64,
}

impl Default for ArfConfig {
    fn default() -> Self {
        Self {
            ensemble_size: 10,
            poisson_lambda: Some(6.0),
            max_features: MaxFeatures::Sqrt,
            warning_delta: Some(0.01),
            drift_delta: Some(0.001),
            tree: HoeffdingTreeConfig::default(),
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Member {
    tree: HoeffdingTreeRegressor,
    background: Option<HoeffdingTreeRegressor>,
    warning: Option<Adwin>,
    drift: Option<Adwin>,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveRandomForestRegressor {
    config: ArfConfig,
    dim: Dimension,
    members: Vec<Member>,
    replacements: u64,
    background_starts: u64,
}

impl AdaptiveRandomForestRegressor {
    pub fn new(config: ArfConfig) -> Result<Self, ModelError> {
        if config.ensemble_size < 1 {
            return Err(ModelError::Config("ensemble_size must be at least 1".into()));
        }
        if let Some(l) = config.poisson_lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(ModelError::Config("poisson_lambda must be positive".into()));
            }
        }
        for d in [config.warning_delta, config.drift_delta].into_iter().flatten() {
            if !(d > 0.0 && d < 1.0) {
                return Err(ModelError::Config("detector delta must be in (0, 1)".into()));
            }
        }
        // validates the member tree settings
        HoeffdingTreeRegressor::new(config.tree.clone())?;
        Ok(Self {
            config,
            dim: Dimension::default(),
            members: Vec::new(),
            replacements: 0,
            background_starts: 0,
        })
    }

    pub fn config(&self) -> &ArfConfig {
        &self.config
    }

    /// Members replaced after a confirmed drift.
    pub fn replacements(&self) -> u64 {
        self.replacements
    }

    pub fn background_starts(&self) -> u64 {
        self.background_starts
    }

    pub fn ensemble_size(&self) -> usize {
        self.config.ensemble_size
    }

    fn tree_config(&self, dim: usize, seed: u64) -> HoeffdingTreeConfig {
        let m = self.config.max_features.resolve(dim);
        HoeffdingTreeConfig {
            max_features: (m < dim).then_some(m),
            seed,
            ..self.config.tree.clone()
        }
    }

    fn new_tree(&self, dim: usize, seed: u64) -> HoeffdingTreeRegressor {
        HoeffdingTreeRegressor::new(self.tree_config(dim, seed)).expect("validated in new")
    }

    fn init_members(&mut self, dim: usize) {
        let mut master = ChaCha8Rng::seed_from_u64(self.config.seed);
        self.members = (0..self.config.ensemble_size)
            .map(|_| {
                let tree_seed = master.next_u64();
                let member_seed = master.next_u64();
                Member {
                    tree: self.new_tree(dim, tree_seed),
                    background: None,
                    warning: self.config.warning_delta.map(Adwin::new),
                    drift: self.config.drift_delta.map(Adwin::new),
                    rng: ChaCha8Rng::seed_from_u64(member_seed),
                }
            })
            .collect();
    }

    pub fn learn(&mut self, features: &[f64], target: f64) -> Result<(), ModelError> {
        let dim = self.dim.bind(features.len())?;
        check_finite(features, target)?;
        if self.members.is_empty() {
            self.init_members(dim);
        }
        let poisson = self
            .config
            .poisson_lambda
            .map(|l| Poisson::new(l).expect("validated lambda"));

        let mut members = std::mem::take(&mut self.members);
        for member in &mut members {
            let prediction = member.tree.predict(features)?;
            let weight = match &poisson {
                Some(p) => p.sample(&mut member.rng),
                None => 1.0,
            };
            if weight > 0.0 {
                member.tree.learn_weighted(features, target, weight)?;
                if let Some(bg) = member.background.as_mut() {
                    bg.learn_weighted(features, target, weight)?;
                }
            }

            let error = (target - prediction).abs();
            let warned = match member.warning.as_mut() {
                Some(w) => w.update(error)?.drift,
                None => false,
            };
            if warned {
                let seed = member.rng.random();
                member.background = Some(self.new_tree(dim, seed));
                member.warning = self.config.warning_delta.map(Adwin::new);
                self.background_starts += 1;
            }
            let drifted = match member.drift.as_mut() {
                Some(d) => d.update(error)?.drift,
                None => false,
            };
            if drifted {
                member.tree = match member.background.take() {
                    Some(bg) => bg,
                    None => {
                        let seed = member.rng.random();
                        self.new_tree(dim, seed)
                    }
                };
                member.warning = self.config.warning_delta.map(Adwin::new);
                member.drift = self.config.drift_delta.map(Adwin::new);
                self.replacements += 1;
            }
        }
        self.members = members;
        Ok(())
    }

    /// Mean of the member predictions; 0.0 before the first example.
    pub fn predict(&self, features: &[f64]) -> Result<f64, ModelError> {
        self.dim.check(features.len())?;
        if self.members.is_empty() {
            return Ok(0.0);
        }
        let mut sum = 0.0;
        for m in &self.members {
            sum += m.tree.predict(features)?;
        }
        Ok(sum / self.members.len() as f64)
    }

    /// Individual member predictions.
    pub fn member_predictions(&self, features: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.members.iter().map(|m| m.tree.predict(features)).collect()
    }
}

impl Default for AdaptiveRandomForestRegressor {
    fn default() -> Self {
        Self::new(ArfConfig::default()).expect("defaults are valid")
    }
}

impl Regressor for AdaptiveRandomForestRegressor {
    fn fit(&mut self, rows: &[&[f64]], targets: &[f64]) -> Result<(), ModelError> {
        learn_all(self, rows, targets)
    }

    fn predict_one(&self, features: &[f64]) -> Result<f64, ModelError> {
        self.predict(features)
    }

    fn learn_one(&mut self, features: &[f64], target: f64) -> Result<(), ModelError> {
        self.learn(features, target)
    }

    fn is_incremental(&self) -> bool {
        true
    }

    fn snapshot(&self) -> Option<ModelSnapshot> {
        Some(ModelSnapshot::AdaptiveRandomForest(self.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_members_is_a_config_error() {
        let cfg = ArfConfig {
            ensemble_size: 0,
            ..ArfConfig::default()
        };
        assert!(matches!(
            AdaptiveRandomForestRegressor::new(cfg),
            Err(ModelError::Config(_))
        ));
    }

    #[test]
    fn sqrt_features_round_up() {
        assert_eq!(MaxFeatures::Sqrt.resolve(50), 8);
        assert_eq!(MaxFeatures::Sqrt.resolve(1), 1);
        assert_eq!(MaxFeatures::Count(99).resolve(5), 5);
    }

    #[test]
    fn fresh_forest_predicts_zero() {
        let f = AdaptiveRandomForestRegressor::default();
        assert_eq!(f.predict(&[1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn constant_target_gives_constant_prediction() {
        let mut f = AdaptiveRandomForestRegressor::default();
        for i in 0..500 {
            f.learn(&[i as f64, (i * 7 % 13) as f64], 12.5).unwrap();
        }
        for p in f.member_predictions(&[3.0, 4.0]).unwrap() {
            assert!((p - 12.5).abs() < 1e-9);
        }
        assert!((f.predict(&[3.0, 4.0]).unwrap() - 12.5).abs() < 1e-9);
    }

    #[test]
    fn same_seed_is_reproducible() {
        let run = || {
            let mut f = AdaptiveRandomForestRegressor::default();
            let mut out = Vec::new();
            for i in 0..800 {
                let x = [(i % 17) as f64, (i % 5) as f64, (i % 3) as f64];
                out.push(f.predict(&x).unwrap());
                f.learn(&x, x[0] * 2.0 + x[1]).unwrap();
            }
            out
        };
        let a = run();
        let b = run();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
