//! Error metrics, the hold-out and prequential schemes, aggregation, and
//! significance tests.

pub mod metrics;
pub mod schemes;
pub mod stats;

pub use metrics::{aggregate, compute_metrics, Aggregate, MetricsReport};
pub use schemes::{holdout_scored, prequential_scored, run_holdout, run_prequential, ScoreWindow, ScoredRun};
pub use stats::{
    mann_whitney_u, mann_whitney_u_with, normality_test, welch_t, MwMethod, StatTestResult,
    StatsError, TestKind, ALPHAS,
};
