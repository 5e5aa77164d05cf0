//! The contract every learner implements, batch or online.

use serde::{Deserialize, Serialize};

use crate::snapshot::ModelSnapshot;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite input")]
    NonFinite,
    #[error("model does not support incremental updates")]
    NotIncremental,
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// A regression model over fixed-length real feature vectors.
///
/// Batch learners rebuild from scratch on every [`Regressor::fit`]. Online
/// learners treat `fit` as a chronological pass of [`Regressor::learn_one`]
/// and keep their state between calls. `predict_one` never mutates.
pub trait Regressor: Send {
    fn fit(&mut self, rows: &[&[f64]], targets: &[f64]) -> Result<(), ModelError>;

    fn predict_one(&self, features: &[f64]) -> Result<f64, ModelError>;

    fn learn_one(&mut self, _features: &[f64], _target: f64) -> Result<(), ModelError> {
        Err(ModelError::NotIncremental)
    }

    fn is_incremental(&self) -> bool {
        false
    }

    /// Serializable state, when the model has one.
    fn snapshot(&self) -> Option<ModelSnapshot> {
        None
    }
}

/// Online `fit`: learn every row in order.
pub(crate) fn learn_all<R: Regressor + ?Sized>(
    model: &mut R,
    rows: &[&[f64]],
    targets: &[f64],
) -> Result<(), ModelError> {
    for (x, &y) in rows.iter().zip(targets) {
        model.learn_one(x, y)?;
    }
    Ok(())
}

pub(crate) fn check_finite(features: &[f64], target: f64) -> Result<(), ModelError> {
    if target.is_finite() && features.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ModelError::NonFinite)
    }
}

/// Expected feature count, fixed by the first example seen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimension(Option<usize>);

impl Dimension {
    pub fn get(&self) -> Option<usize> {
        self.0
    }

    /// Fixes the dimension on first use, then rejects mismatches.
    pub fn bind(&mut self, got: usize) -> Result<usize, ModelError> {
        match self.0 {
            None => {
                self.0 = Some(got);
                Ok(got)
            }
            Some(expected) => self.check(got).map(|_| expected),
        }
    }

    pub fn check(&self, got: usize) -> Result<(), ModelError> {
        match self.0 {
            Some(expected) if expected != got => Err(ModelError::DimensionMismatch { expected, got }),
            _ => Ok(()),
        }
    }
}
