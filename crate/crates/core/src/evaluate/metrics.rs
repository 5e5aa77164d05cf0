use serde::{Deserialize, Serialize};

/// Errors of one model on one test set.
///
/// MAE and RMSE cover every pair. MAPE skips pairs whose target is zero and
/// is `None` when all of them are. An empty test set gives NaN errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Percent.
    pub mape: Option<f64>,
    pub mae: f64,
    pub rmse: f64,
    /// Pairs with a nonzero target.
    pub n_scored: usize,
    pub n_skipped_zero_target: usize,
    pub wall_seconds: f64,
}

impl MetricsReport {
    pub fn empty() -> Self {
        Self {
            mape: None,
            mae: f64::NAN,
            rmse: f64::NAN,
            n_scored: 0,
            n_skipped_zero_target: 0,
            wall_seconds: 0.0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n_scored + self.n_skipped_zero_target == 0
    }

    pub fn n_examples(&self) -> usize {
        self.n_scored + self.n_skipped_zero_target
    }
}

/// Metrics over `(target, prediction)` pairs.
pub fn compute_metrics(pairs: &[(f64, f64)]) -> MetricsReport {
    if pairs.is_empty() {
        return MetricsReport::empty();
    }
    let n = pairs.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut pct_sum = 0.0;
    let mut scored = 0;
    for &(y, p) in pairs {
        let e = (y - p).abs();
        abs_sum += e;
        sq_sum += e * e;
        if y != 0.0 {
            pct_sum += e / y.abs();
            scored += 1;
        }
    }
    MetricsReport {
        mape: (scored > 0).then(|| 100.0 * pct_sum / scored as f64),
        mae: abs_sum / n,
        rmse: (sq_sum / n).sqrt(),
        n_scored: scored,
        n_skipped_zero_target: pairs.len() - scored,
        wall_seconds: 0.0,
    }
}

/// Unweighted mean of several reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    /// Means of MAPE, MAE, RMSE and seconds; counts are summed.
    pub report: MetricsReport,
    /// Non-empty reports averaged.
    pub runs: usize,
    /// Runs left out of the MAPE mean because theirs was undefined.
    pub mape_undefined: usize,
    pub empty: usize,
}

/// Sum in ascending order, so the result does not depend on input order.
fn ordered_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

/// Averages the non-empty reports. Undefined MAPEs are excluded from the
/// MAPE mean and counted. The result is independent of the order of
/// `reports`.
pub fn aggregate(reports: &[MetricsReport]) -> Aggregate {
    let live: Vec<&MetricsReport> = reports.iter().filter(|r| !r.is_empty()).collect();
    let empty = reports.len() - live.len();
    if live.is_empty() {
        return Aggregate {
            report: MetricsReport::empty(),
            runs: 0,
            mape_undefined: 0,
            empty,
        };
    }
    let n = live.len() as f64;
    let mapes: Vec<f64> = live.iter().filter_map(|r| r.mape).collect();
    let report = MetricsReport {
        mape: (!mapes.is_empty()).then(|| ordered_sum(mapes.iter().copied()) / mapes.len() as f64),
        mae: ordered_sum(live.iter().map(|r| r.mae)) / n,
        rmse: ordered_sum(live.iter().map(|r| r.rmse)) / n,
        n_scored: live.iter().map(|r| r.n_scored).sum(),
        n_skipped_zero_target: live.iter().map(|r| r.n_skipped_zero_target).sum(),
        wall_seconds: ordered_sum(live.iter().map(|r| r.wall_seconds)) / n,
    };
    Aggregate {
        report,
        runs: live.len(),
        mape_undefined: live.len() - mapes.len(),
        empty,
    }
}
