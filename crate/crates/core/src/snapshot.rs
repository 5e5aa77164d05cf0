//! Self-describing JSON checkpoints for every model.
//!
//! A snapshot file is an envelope `{"format": "epistream-model",
//! "version": 1, "model": {"kind": ..., "state": ...}}`. Loading checks the
//! format tag and refuses newer versions.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::batch::{CartTree, ForestModel, GbrtModel, LinearModel, LinearSvrModel};
use crate::model::{ModelError, Regressor};
use crate::online::{
    AdaptiveRandomForestRegressor, HoeffdingAdaptiveTreeRegressor, HoeffdingTreeRegressor,
    PassiveAggressiveRegressor,
};

pub const SNAPSHOT_FORMAT: &str = "epistream-model";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "state", rename_all = "snake_case")]
pub enum ModelSnapshot {
    HoeffdingTree(HoeffdingTreeRegressor),
    HoeffdingAdaptiveTree(HoeffdingAdaptiveTreeRegressor),
    AdaptiveRandomForest(AdaptiveRandomForestRegressor),
    PassiveAggressive(PassiveAggressiveRegressor),
    Linear(LinearModel),
    Cart(CartTree),
    Forest(ForestModel),
    Gbrt(GbrtModel),
    LinearSvr(LinearSvrModel),
}

#[derive(Debug, Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: ModelSnapshot,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("snapshot i/o: {0}")]
    Io(#[from] io::Error),
    #[error("malformed snapshot: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a model snapshot (format tag {0:?})")]
    Format(String),
    #[error("snapshot version {0} is newer than supported version {SNAPSHOT_VERSION}")]
    Version(u32),
}

impl ModelSnapshot {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::HoeffdingTree(_) => "hoeffding_tree",
            Self::HoeffdingAdaptiveTree(_) => "hoeffding_adaptive_tree",
            Self::AdaptiveRandomForest(_) => "adaptive_random_forest",
            Self::PassiveAggressive(_) => "passive_aggressive",
            Self::Linear(_) => "linear",
            Self::Cart(_) => "cart",
            Self::Forest(_) => "forest",
            Self::Gbrt(_) => "gbrt",
            Self::LinearSvr(_) => "linear_svr",
        }
    }

    pub fn to_json(&self) -> Result<String, SnapshotError> {
        Ok(serde_json::to_string(&Envelope {
            format: SNAPSHOT_FORMAT.to_string(),
            version: SNAPSHOT_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self, SnapshotError> {
        // Check the header before decoding the payload so foreign files get a
        // precise error.
        #[derive(Deserialize)]
        struct Header {
            format: String,
            version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.format != SNAPSHOT_FORMAT {
            return Err(SnapshotError::Format(header.format));
        }
        if header.version > SNAPSHOT_VERSION {
            return Err(SnapshotError::Version(header.version));
        }
        let env: Envelope = serde_json::from_str(text)?;
        Ok(env.model)
    }

    pub fn save(&self, path: &Path) -> Result<(), SnapshotError> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SnapshotError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn into_regressor(self) -> Box<dyn Regressor> {
        match self {
            Self::HoeffdingTree(m) => Box::new(m),
            Self::HoeffdingAdaptiveTree(m) => Box::new(m),
            Self::AdaptiveRandomForest(m) => Box::new(m),
            Self::PassiveAggressive(m) => Box::new(m),
            Self::Linear(m) => Box::new(m),
            Self::Cart(m) => Box::new(m),
            Self::Forest(m) => Box::new(m),
            Self::Gbrt(m) => Box::new(m),
            Self::LinearSvr(m) => Box::new(m),
        }
    }
}

/// Convenience for `model.snapshot()` with a clear error for models that
/// cannot be checkpointed.
pub fn snapshot_of(model: &dyn Regressor) -> Result<ModelSnapshot, ModelError> {
    model
        .snapshot()
        .ok_or_else(|| ModelError::Config("model does not support snapshots".into()))
}
