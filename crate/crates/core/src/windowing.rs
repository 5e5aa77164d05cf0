//! Sliding-window supervised examples and milestone train/test splits.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::ingest::CaseSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowParams {
    /// Input days per example.
    pub window: usize,
    /// Days between the last input day and the first averaged target day.
    pub horizon: usize,
    /// Consecutive days averaged into the target.
    pub avg_len: usize,
}

impl Default for WindowParams {
    fn default() -> Self {
        Self {
            window: 50,
            horizon: 30,
            avg_len: 10,
        }
    }
}

impl WindowParams {
    /// Number of series days one example spans.
    pub fn span(&self) -> usize {
        self.window + self.horizon + self.avg_len - 1
    }

    pub fn example_count(&self, series_len: usize) -> usize {
        (series_len + 1).saturating_sub(self.span())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedExample {
    /// Daily new cases, oldest first.
    pub features: Vec<f64>,
    /// Mean of `avg_len` consecutive daily counts starting `horizon` days
    /// after the last input day.
    pub target: f64,
    pub country: String,
    pub last_input_date: NaiveDate,
    pub target_start_date: NaiveDate,
    pub target_end_date: NaiveDate,
}

/// Turns a series into chronologically ordered examples. Short series give
/// an empty list.
///
/// Panics if any parameter is zero.
pub fn make_examples(series: &CaseSeries, params: WindowParams) -> Vec<WindowedExample> {
    let WindowParams {
        window,
        horizon,
        avg_len,
    } = params;
    assert!(
        window >= 1 && horizon >= 1 && avg_len >= 1,
        "window, horizon and avg_len must be at least 1"
    );
    let count = params.example_count(series.len());
    (0..count)
        .map(|i| {
            let last_input = i + window - 1;
            let target_start = last_input + horizon;
            let target_days = &series.values[target_start..target_start + avg_len];
            WindowedExample {
                features: series.values[i..=last_input].to_vec(),
                target: target_days.iter().sum::<f64>() / avg_len as f64,
                country: series.country.clone(),
                last_input_date: series.date_at(last_input),
                target_start_date: series.date_at(target_start),
                target_end_date: series.date_at(target_start + avg_len - 1),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MilestoneSchedule {
    pub milestones: Vec<NaiveDate>,
    pub test_span_days: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleError {
    #[error("n_milestones and test_span_days must be at least 1")]
    Empty,
    #[error("milestone {milestone} precedes the earliest usable example (target ending {earliest})")]
    BeforeData {
        milestone: NaiveDate,
        earliest: NaiveDate,
    },
    #[error("test window of final milestone {milestone} ends after the data ({data_end})")]
    AfterData {
        milestone: NaiveDate,
        data_end: NaiveDate,
    },
    #[error("no usable examples in any series")]
    NoExamples,
}

/// Lays out `n_milestones` cut dates `test_span_days` apart, ending at
/// `final_milestone`. The first milestone must leave at least one training
/// example, and the final test window must lie inside the data.
pub fn make_schedule(
    series_set: &[CaseSeries],
    params: WindowParams,
    n_milestones: usize,
    test_span_days: u32,
    final_milestone: NaiveDate,
) -> Result<MilestoneSchedule, ScheduleError> {
    if n_milestones == 0 || test_span_days == 0 {
        return Err(ScheduleError::Empty);
    }
    let milestones: Vec<NaiveDate> = (0..n_milestones)
        .rev()
        .map(|k| final_milestone - Duration::days(k as i64 * i64::from(test_span_days)))
        .collect();

    let usable: Vec<&CaseSeries> = series_set
        .iter()
        .filter(|s| params.example_count(s.len()) > 0)
        .collect();
    let earliest = usable
        .iter()
        .map(|s| s.date_at(params.span() - 1))
        .min()
        .ok_or(ScheduleError::NoExamples)?;
    let data_end = usable.iter().map(|s| s.end_date()).max().expect("non-empty");

    if milestones[0] < earliest {
        return Err(ScheduleError::BeforeData {
            milestone: milestones[0],
            earliest,
        });
    }
    let last_test_day = final_milestone + Duration::days(i64::from(test_span_days));
    if last_test_day > data_end {
        return Err(ScheduleError::AfterData {
            milestone: final_milestone,
            data_end,
        });
    }
    Ok(MilestoneSchedule {
        milestones,
        test_span_days,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub milestone: NaiveDate,
    pub train: Vec<WindowedExample>,
    pub test: Vec<WindowedExample>,
}

impl Split {
    pub fn test_window_end(&self, test_span_days: u32) -> NaiveDate {
        self.milestone + Duration::days(i64::from(test_span_days))
    }
}

/// Partitions examples on `target_end_date`: train ends on or before the
/// milestone, test ends within the following `test_span_days`. Later
/// examples are dropped.
pub fn split_at(examples: &[WindowedExample], milestone: NaiveDate, test_span_days: u32) -> Split {
    let test_end = milestone + Duration::days(i64::from(test_span_days));
    let mut train = Vec::new();
    let mut test = Vec::new();
    for ex in examples {
        if ex.target_end_date <= milestone {
            train.push(ex.clone());
        } else if ex.target_end_date <= test_end {
            test.push(ex.clone());
        }
    }
    if test.is_empty() {
        log::debug!("empty test split at milestone {milestone}");
    }
    Split {
        milestone,
        train,
        test,
    }
}

/// Merges per-country example lists into one list ordered by
/// (last_input_date, country).
pub fn merge_multi_country(
    per_country: &BTreeMap<String, Vec<WindowedExample>>,
) -> Vec<WindowedExample> {
    let mut merged: Vec<WindowedExample> = per_country.values().flatten().cloned().collect();
    merged.sort_by(|a, b| {
        a.last_input_date
            .cmp(&b.last_input_date)
            .then_with(|| a.country.cmp(&b.country))
    });
    merged
}

/// Same ordering as [`merge_multi_country`] applied to already-split lists.
pub fn sort_multi_country(examples: &mut [WindowedExample]) {
    examples.sort_by(|a, b| {
        a.last_input_date
            .cmp(&b.last_input_date)
            .then_with(|| a.country.cmp(&b.country))
    });
}
