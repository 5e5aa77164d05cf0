//! Hold-out and prequential evaluation of one model on one milestone.

use std::time::Instant;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, MetricsReport};
use crate::model::{ModelError, Regressor};
use crate::windowing::WindowedExample;

/// Inclusive range of target end dates that count towards the metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreWindow {
    pub first: NaiveDate,
    pub last: NaiveDate,
}

impl ScoreWindow {
    /// The hold-out test period of a milestone: the `span_days` days after
    /// it.
    pub fn after_milestone(milestone: NaiveDate, span_days: u32) -> Self {
        Self {
            first: milestone + Duration::days(1),
            last: milestone + Duration::days(i64::from(span_days)),
        }
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.first <= date && date <= self.last
    }
}

fn rows_and_targets(examples: &[WindowedExample]) -> (Vec<&[f64]>, Vec<f64>) {
    (
        examples.iter().map(|e| e.features.as_slice()).collect(),
        examples.iter().map(|e| e.target).collect(),
    )
}

/// Predictions of one evaluation, kept so callers can break the metrics
/// down (for example by country).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRun {
    /// `(index into the scored list, target, prediction)` for every scored
    /// example.
    pub scored: Vec<(usize, f64, f64)>,
    pub wall_seconds: f64,
}

impl ScoredRun {
    pub fn report(&self) -> MetricsReport {
        self.report_where(|_| true)
    }

    /// Metrics over the scored examples whose index passes `keep`.
    pub fn report_where(&self, keep: impl Fn(usize) -> bool) -> MetricsReport {
        let pairs: Vec<(f64, f64)> = self
            .scored
            .iter()
            .filter(|(i, _, _)| keep(*i))
            .map(|&(_, y, p)| (y, p))
            .collect();
        let mut r = compute_metrics(&pairs);
        r.wall_seconds = self.wall_seconds;
        r
    }
}

/// Fits `model` on `train` and scores it on `test`.
///
/// Batch models refit from scratch; online models learn `train` one example
/// at a time in the given (chronological) order. The wall time covers
/// fitting and prediction. An empty test set gives an empty report.
pub fn run_holdout(
    model: &mut dyn Regressor,
    train: &[WindowedExample],
    test: &[WindowedExample],
) -> Result<MetricsReport, ModelError> {
    Ok(holdout_scored(model, train, test)?.report())
}

/// [`run_holdout`] keeping every prediction; indices refer to `test`.
pub fn holdout_scored(
    model: &mut dyn Regressor,
    train: &[WindowedExample],
    test: &[WindowedExample],
) -> Result<ScoredRun, ModelError> {
    let start = Instant::now();
    let (rows, targets) = rows_and_targets(train);
    model.fit(&rows, &targets)?;
    let mut scored = Vec::with_capacity(test.len());
    for (i, ex) in test.iter().enumerate() {
        scored.push((i, ex.target, model.predict_one(&ex.features)?));
    }
    Ok(ScoredRun {
        scored,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Pre-trains on `pretrain` without scoring, then runs test-then-train over
/// `stream`. Only examples whose target ends inside `window` are scored,
/// but every stream example is learned.
pub fn run_prequential(
    model: &mut dyn Regressor,
    pretrain: &[WindowedExample],
    stream: &[WindowedExample],
    window: ScoreWindow,
) -> Result<MetricsReport, ModelError> {
    Ok(prequential_scored(model, pretrain, stream, window)?.report())
}

/// [`run_prequential`] keeping every scored prediction; indices refer to
/// `stream`.
pub fn prequential_scored(
    model: &mut dyn Regressor,
    pretrain: &[WindowedExample],
    stream: &[WindowedExample],
    window: ScoreWindow,
) -> Result<ScoredRun, ModelError> {
    if !model.is_incremental() {
        return Err(ModelError::NotIncremental);
    }
    let start = Instant::now();
    for ex in pretrain {
        model.learn_one(&ex.features, ex.target)?;
    }
    let mut scored = Vec::new();
    for (i, ex) in stream.iter().enumerate() {
        let p = model.predict_one(&ex.features)?;
        if window.contains(ex.target_end_date) {
            scored.push((i, ex.target, p));
        }
        model.learn_one(&ex.features, ex.target)?;
    }
    Ok(ScoredRun {
        scored,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Predicts the last target it learned, 0 before that.
    struct LastSeen(f64);

    impl Regressor for LastSeen {
        fn fit(&mut self, rows: &[&[f64]], targets: &[f64]) -> Result<(), ModelError> {
            for (x, y) in rows.iter().zip(targets) {
                self.learn_one(x, *y)?;
            }
            Ok(())
        }
        fn predict_one(&self, _: &[f64]) -> Result<f64, ModelError> {
            Ok(self.0)
        }
        fn learn_one(&mut self, _: &[f64], y: f64) -> Result<(), ModelError> {
            self.0 = y;
            Ok(())
        }
        fn is_incremental(&self) -> bool {
            true
        }
    }

    fn ex(day: u32, target: f64) -> WindowedExample {
        let d = NaiveDate::from_ymd_opt(2020, 6, day).unwrap();
        WindowedExample {
            features: vec![0.0],
            target,
            country: "X".into(),
            last_input_date: d,
            target_start_date: d,
            target_end_date: d,
        }
    }

    #[test]
    fn prequential_hand_trace() {
        let stream: Vec<_> = (1..=4).map(|d| ex(d, d as f64)).collect();
        let w = ScoreWindow {
            first: stream[0].target_end_date,
            last: stream[3].target_end_date,
        };
        let r = run_prequential(&mut LastSeen(0.0), &[], &stream, w).unwrap();
        assert_eq!(r.mae, 1.0);
        assert_eq!(r.n_scored, 4);
    }

    #[test]
    fn examples_outside_window_are_learned_not_scored() {
        let stream: Vec<_> = (1..=4).map(|d| ex(d, 10.0 * d as f64)).collect();
        let w = ScoreWindow {
            first: stream[2].target_end_date,
            last: stream[3].target_end_date,
        };
        let r = run_prequential(&mut LastSeen(0.0), &[], &stream, w).unwrap();
        // day 3 predicted from day 2, day 4 from day 3
        assert_eq!(r.n_scored, 2);
        assert_eq!(r.mae, 10.0);
    }

    #[test]
    fn holdout_learns_train_only() {
        let train = vec![ex(1, 5.0), ex(2, 6.0)];
        let test = vec![ex(3, 8.0), ex(4, 9.0)];
        let r = run_holdout(&mut LastSeen(0.0), &train, &test).unwrap();
        assert_eq!(r.mae, 2.5);
    }

    #[test]
    fn empty_test_gives_empty_report() {
        let r = run_holdout(&mut LastSeen(0.0), &[ex(1, 1.0)], &[]).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn window_after_milestone() {
        let m = NaiveDate::from_ymd_opt(2020, 10, 1).unwrap();
        let w = ScoreWindow::after_milestone(m, 30);
        assert!(!w.contains(m));
        assert!(w.contains(m + Duration::days(1)));
        assert!(w.contains(m + Duration::days(30)));
        assert!(!w.contains(m + Duration::days(31)));
    }
}
