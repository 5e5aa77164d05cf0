//! Experiment orchestration: configuration, the model registry, the three
//! experiments, significance testing and result files.

pub mod config;
pub mod dataset;
pub mod output;
pub mod registry;
pub mod results;
pub mod runner;
pub mod significance;

pub use config::{AlgorithmParams, DataConfig, MilestoneConfig, Mode, RunConfig, RunSection, Scheme};
pub use dataset::{ingest_check, Dataset, IngestSummary};
pub use output::{write_experiment, write_significance, Manifest};
pub use registry::{AlgorithmInfo, DefaultFactory, ModelFactory, ALL_ALGORITHMS, ONLINE_ALGORITHMS};
pub use results::{ResultRow, ResultsTable, ALL, MEAN};
pub use runner::{
    compare_modes, run_all, run_experiment_1, run_experiment_2, run_experiment_3, worker_pool,
    AllOutput, ExperimentOutput, ModeComparison,
};
pub use significance::{run_significance, SignificanceOutcome};

use crate::ingest::IngestError;
use crate::model::ModelError;
use crate::windowing::ScheduleError;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("model error: {0}")]
    Model(ModelError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl ExperimentError {
    /// 1 configuration, 2 data, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Data(_) => 2,
            Self::Model(ModelError::Config(_)) => 1,
            Self::Model(_) | Self::Io(_) => 3,
        }
    }
}

impl From<IngestError> for ExperimentError {
    fn from(e: IngestError) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<ScheduleError> for ExperimentError {
    fn from(e: ScheduleError) -> Self {
        Self::Config(format!("milestones: {e}"))
    }
}

impl From<ModelError> for ExperimentError {
    fn from(e: ModelError) -> Self {
        Self::Model(e)
    }
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for ExperimentError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}
