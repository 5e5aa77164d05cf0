//! Loading, country selection, windowing and milestone splits.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::ExperimentError;
use crate::ingest::{
    build_all_series, build_series, parse_csv_with, select_countries, CaseSeries, CountrySelection,
    RawDailyRecord,
};
use crate::windowing::{
    make_examples, make_schedule, sort_multi_country, split_at, MilestoneSchedule, Split,
    WindowedExample,
};

/// Everything the experiments need from the data, computed once.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// Countries in selection order.
    pub countries: Vec<String>,
    pub series: Vec<CaseSeries>,
    pub selection: Option<CountrySelection>,
    pub schedule: MilestoneSchedule,
    pub examples: BTreeMap<String, Vec<WindowedExample>>,
}

impl Dataset {
    /// Reads `config.data.path`.
    pub fn load(config: &RunConfig) -> Result<Self, ExperimentError> {
        let records = parse_csv_with(&config.data.path, &config.data.columns)?;
        Self::from_records(&records, config)
    }

    /// Selects countries (the explicit list, or the top ranked ones) and
    /// builds examples and the milestone schedule.
    pub fn from_records(records: &[RawDailyRecord], config: &RunConfig) -> Result<Self, ExperimentError> {
        let d = &config.data;
        let (series, selection) = match &d.countries {
            Some(list) => {
                let series = list
                    .iter()
                    .map(|c| build_series(records, c))
                    .collect::<Result<Vec<_>, _>>()?;
                (series, None)
            }
            None => {
                let all = build_all_series(records);
                let sel = select_countries(&all, d.selection_date, d.min_months, d.top_k);
                if sel.selected.is_empty() {
                    return Err(ExperimentError::Data(format!(
                        "no country has {} months of data by {}",
                        d.min_months, d.selection_date
                    )));
                }
                let series = sel
                    .selected
                    .iter()
                    .map(|c| all.iter().find(|s| &s.country == c).expect("selected from all").clone())
                    .collect();
                (series, Some(sel))
            }
        };
        Self::from_series(series, selection, config)
    }

    pub fn from_series(
        series: Vec<CaseSeries>,
        selection: Option<CountrySelection>,
        config: &RunConfig,
    ) -> Result<Self, ExperimentError> {
        if series.is_empty() {
            return Err(ExperimentError::Data("no countries to evaluate".into()));
        }
        let m = &config.milestones;
        let schedule = make_schedule(&series, config.window, m.count, m.test_span_days, m.final_milestone)?;
        let examples = series
            .iter()
            .map(|s| (s.country.clone(), make_examples(s, config.window)))
            .collect();
        Ok(Self {
            countries: series.iter().map(|s| s.country.clone()).collect(),
            series,
            selection,
            schedule,
            examples,
        })
    }

    pub fn milestones(&self) -> &[NaiveDate] {
        &self.schedule.milestones
    }

    pub fn country_split(&self, country: &str, milestone: NaiveDate) -> Split {
        split_at(&self.examples[country], milestone, self.schedule.test_span_days)
    }

    /// Union of the per-country splits, each side ordered by (last input
    /// date, country).
    pub fn merged_split(&self, milestone: NaiveDate) -> Split {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for c in &self.countries {
            let s = self.country_split(c, milestone);
            train.extend(s.train);
            test.extend(s.test);
        }
        sort_multi_country(&mut train);
        sort_multi_country(&mut test);
        Split {
            milestone,
            train,
            test,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub records: usize,
    pub countries: usize,
    pub first_date: Option<NaiveDate>,
    pub last_date: Option<NaiveDate>,
    pub negative_rows: usize,
    pub selection: CountrySelection,
}

/// Parses the data file and reports what the experiments would use.
pub fn ingest_check(config: &RunConfig) -> Result<IngestSummary, ExperimentError> {
    let records = parse_csv_with(&config.data.path, &config.data.columns)?;
    let all = build_all_series(&records);
    let d = &config.data;
    Ok(IngestSummary {
        records: records.len(),
        countries: all.len(),
        first_date: records.iter().map(|r| r.report_date).min(),
        last_date: records.iter().map(|r| r.report_date).max(),
        negative_rows: records.iter().filter(|r| r.cases < 0).count(),
        selection: select_countries(&all, d.selection_date, d.min_months, d.top_k),
    })
}
