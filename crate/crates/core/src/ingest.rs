//! Reading the ECDC "COVID-19 Coronavirus data - daily" CSV into contiguous
//! per-country case series, and choosing which countries enter an experiment.
//!
//! The source file has twelve columns. Only the date columns, the daily case
//! count and the country identifiers are interpreted; deaths and population
//! are parsed for completeness and otherwise ignored.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

/// Header names of the published daily file, in column order.
pub const ECDC_HEADER: [&str; 12] = [
    "dateRep",
    "day",
    "month",
    "year",
    "cases",
    "deaths",
    "countriesAndTerritories",
    "geoId",
    "countryterritoryCode",
    "popData2019",
    "continentExp",
    "Cumulative_number_for_14_days_of_COVID-19_cases_per_100000",
];

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("no records for country {0:?}")]
    CountryNotFound(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Maps logical fields onto header names. `date` is only consulted when the
/// `day`/`month`/`year` columns are absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColumnMapping {
    pub date: String,
    pub day: String,
    pub month: String,
    pub year: String,
    pub cases: String,
    pub deaths: String,
    pub country: String,
    pub geo_id: String,
    pub population: String,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            date: "dateRep".into(),
            day: "day".into(),
            month: "month".into(),
            year: "year".into(),
            cases: "cases".into(),
            deaths: "deaths".into(),
            country: "countriesAndTerritories".into(),
            geo_id: "geoId".into(),
            population: "popData2019".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDailyRecord {
    pub report_date: NaiveDate,
    pub country_name: String,
    pub geo_id: String,
    /// Daily new cases. Negative values are reporting corrections.
    pub cases: i64,
    pub deaths: i64,
    pub population: Option<u64>,
}

/// One country's daily new cases with no calendar gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSeries {
    pub country: String,
    pub start_date: NaiveDate,
    pub values: Vec<f64>,
}

impl CaseSeries {
    pub fn new(country: impl Into<String>, start_date: NaiveDate, values: Vec<f64>) -> Self {
        Self {
            country: country.into(),
            start_date,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn date_at(&self, index: usize) -> NaiveDate {
        self.start_date + Duration::days(index as i64)
    }

    /// Last calendar day covered. Undefined for an empty series.
    pub fn end_date(&self) -> NaiveDate {
        self.date_at(self.values.len().saturating_sub(1))
    }

    /// Sum of daily values on or before `date`.
    pub fn cumulative_until(&self, date: NaiveDate) -> f64 {
        let days = (date - self.start_date).num_days();
        if days < 0 {
            return 0.0;
        }
        let upto = ((days + 1) as usize).min(self.values.len());
        self.values[..upto].iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountrySelection {
    pub as_of: NaiveDate,
    pub min_months: u32,
    pub top_k: usize,
    pub eligible_count: usize,
    pub selected: Vec<String>,
}

/// Parses a daily CSV with the default ECDC header names.
pub fn parse_csv(path: impl AsRef<Path>) -> Result<Vec<RawDailyRecord>, IngestError> {
    parse_csv_with(path, &ColumnMapping::default())
}

pub fn parse_csv_with(
    path: impl AsRef<Path>,
    mapping: &ColumnMapping,
) -> Result<Vec<RawDailyRecord>, IngestError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_reader(file, mapping)
}

struct ColumnIndex {
    day_month_year: Option<(usize, usize, usize)>,
    date: Option<usize>,
    cases: usize,
    deaths: Option<usize>,
    country: usize,
    geo_id: usize,
    population: Option<usize>,
}

impl ColumnIndex {
    fn resolve(headers: &csv::StringRecord, mapping: &ColumnMapping) -> Result<Self, IngestError> {
        let names: Vec<&str> = headers
            .iter()
            .map(|h| h.trim_start_matches('\u{feff}').trim())
            .collect();
        let find = |name: &str| names.iter().position(|h| *h == name);
        let require = |name: &str| {
            find(name).ok_or_else(|| IngestError::Schema(format!("missing required column {name:?}")))
        };

        let day_month_year = match (find(&mapping.day), find(&mapping.month), find(&mapping.year)) {
            (Some(d), Some(m), Some(y)) => Some((d, m, y)),
            _ => None,
        };
        let date = find(&mapping.date);
        if day_month_year.is_none() && date.is_none() {
            return Err(IngestError::Schema(format!(
                "need either {:?}/{:?}/{:?} or {:?} columns",
                mapping.day, mapping.month, mapping.year, mapping.date
            )));
        }
        Ok(Self {
            day_month_year,
            date,
            cases: require(&mapping.cases)?,
            deaths: find(&mapping.deaths),
            country: require(&mapping.country)?,
            geo_id: require(&mapping.geo_id)?,
            population: find(&mapping.population),
        })
    }
}

fn parse_date(row: &csv::StringRecord, idx: &ColumnIndex) -> Result<NaiveDate, String> {
    if let Some((d, m, y)) = idx.day_month_year {
        let field = |i: usize, what: &str| -> Result<u32, String> {
            let raw = row.get(i).unwrap_or("").trim();
            raw.parse::<u32>()
                .map_err(|_| format!("invalid {what} field {raw:?}"))
        };
        let (day, month, year) = (field(d, "day")?, field(m, "month")?, field(y, "year")?);
        return NaiveDate::from_ymd_opt(year as i32, month, day)
            .ok_or_else(|| format!("invalid calendar date {day}/{month}/{year}"));
    }
    let raw = row.get(idx.date.expect("checked at resolve")).unwrap_or("").trim();
    NaiveDate::parse_from_str(raw, "%d/%m/%Y").map_err(|_| format!("invalid date {raw:?}"))
}

pub fn parse_reader<R: Read>(
    reader: R,
    mapping: &ColumnMapping,
) -> Result<Vec<RawDailyRecord>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let idx = ColumnIndex::resolve(&headers, mapping)?;

    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let row_err = |message: String| IngestError::Row { line, message };

        let report_date = parse_date(&row, &idx).map_err(row_err)?;
        let cases_raw = row.get(idx.cases).unwrap_or("").trim();
        let cases = cases_raw
            .parse::<i64>()
            .map_err(|_| row_err(format!("invalid cases field {cases_raw:?}")))?;
        let deaths = match idx.deaths.and_then(|i| row.get(i)).map(str::trim) {
            None | Some("") => 0,
            Some(raw) => raw
                .parse::<i64>()
                .map_err(|_| row_err(format!("invalid deaths field {raw:?}")))?,
        };
        let country_name = row.get(idx.country).unwrap_or("").trim().to_string();
        let geo_id = row.get(idx.geo_id).unwrap_or("").trim().to_string();
        if country_name.is_empty() {
            return Err(row_err("empty country name".into()));
        }
        if geo_id.is_empty() {
            return Err(row_err("empty geo id".into()));
        }
        let population = idx
            .population
            .and_then(|i| row.get(i))
            .and_then(|raw| raw.trim().parse::<u64>().ok());

        out.push(RawDailyRecord {
            report_date,
            country_name,
            geo_id,
            cases,
            deaths,
            population,
        });
    }
    Ok(out)
}

/// Writes records back out in the twelve-column daily layout. Columns the
/// records do not carry are left empty.
pub fn write_csv<W: Write>(records: &[RawDailyRecord], writer: W) -> Result<(), IngestError> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(ECDC_HEADER)?;
    for r in records {
        let population = r.population.map(|p| p.to_string()).unwrap_or_default();
        wtr.write_record([
            r.report_date.format("%d/%m/%Y").to_string(),
            r.report_date.format("%-d").to_string(),
            r.report_date.format("%-m").to_string(),
            r.report_date.format("%Y").to_string(),
            r.cases.to_string(),
            r.deaths.to_string(),
            r.country_name.clone(),
            r.geo_id.clone(),
            String::new(),
            population,
            String::new(),
            String::new(),
        ])?;
    }
    wtr.flush().map_err(|source| IngestError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}

fn matches_country(r: &RawDailyRecord, country: &str) -> bool {
    r.country_name == country || r.geo_id == country
}

/// Builds the gap-free series for one country (matched by name or geo id).
/// Missing days become 0 and repeated dates are summed.
pub fn build_series(records: &[RawDailyRecord], country: &str) -> Result<CaseSeries, IngestError> {
    let mut by_date: BTreeMap<NaiveDate, i64> = BTreeMap::new();
    let mut name = None;
    for r in records.iter().filter(|r| matches_country(r, country)) {
        *by_date.entry(r.report_date).or_default() += r.cases;
        name.get_or_insert_with(|| r.country_name.clone());
    }
    let (Some(name), Some((&first, _)), Some((&last, _))) =
        (name, by_date.first_key_value(), by_date.last_key_value())
    else {
        return Err(IngestError::CountryNotFound(country.to_string()));
    };
    let span = (last - first).num_days() as usize + 1;
    let mut values = vec![0.0; span];
    for (date, cases) in by_date {
        values[(date - first).num_days() as usize] = cases as f64;
    }
    Ok(CaseSeries::new(name, first, values))
}

/// Builds one series per distinct country name, ordered by name.
pub fn build_all_series(records: &[RawDailyRecord]) -> Vec<CaseSeries> {
    let mut grouped: HashMap<&str, Vec<RawDailyRecord>> = HashMap::new();
    for r in records {
        grouped.entry(r.country_name.as_str()).or_default().push(r.clone());
    }
    let mut names: Vec<&str> = grouped.keys().copied().collect();
    names.sort_unstable();
    names
        .into_iter()
        .map(|name| build_series(&grouped[name], name).expect("group is non-empty"))
        .collect()
}

/// Days a series covers up to and including `as_of`, or 0 if it starts later.
fn span_until(series: &CaseSeries, as_of: NaiveDate) -> i64 {
    if series.is_empty() || series.start_date > as_of {
        return 0;
    }
    let end = series.end_date().min(as_of);
    (end - series.start_date).num_days() + 1
}

/// Picks the `top_k` countries by cumulative cases at `as_of` among those
/// with at least `min_months` × 30 days of data by then.
pub fn select_countries(
    series_set: &[CaseSeries],
    as_of: NaiveDate,
    min_months: u32,
    top_k: usize,
) -> CountrySelection {
    let min_days = i64::from(min_months) * 30;
    let mut eligible: Vec<(&str, f64)> = series_set
        .iter()
        .filter(|s| span_until(s, as_of) >= min_days && span_until(s, as_of) > 0)
        .map(|s| (s.country.as_str(), s.cumulative_until(as_of)))
        .collect();
    eligible.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let eligible_count = eligible.len();
    CountrySelection {
        as_of,
        min_months,
        top_k,
        eligible_count,
        selected: eligible
            .into_iter()
            .take(top_k)
            .map(|(c, _)| c.to_string())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn rec(date: NaiveDate, country: &str, cases: i64) -> RawDailyRecord {
        RawDailyRecord {
            report_date: date,
            country_name: country.into(),
            geo_id: country[..2].to_uppercase(),
            cases,
            deaths: 0,
            population: None,
        }
    }

    const HEADER: &str = "dateRep,day,month,year,cases,deaths,countriesAndTerritories,geoId,countryterritoryCode,popData2019,continentExp,Cumulative_number_for_14_days_of_COVID-19_cases_per_100000\n";

    #[test]
    fn parses_published_row_layout() {
        let text = format!(
            "{HEADER}14/12/2020,14,12,2020,746,6,Afghanistan,AF,AFG,38041754,Asia,9.01\n"
        );
        let recs = parse_reader(text.as_bytes(), &ColumnMapping::default()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].report_date, d(2020, 12, 14));
        assert_eq!(recs[0].cases, 746);
        assert_eq!(recs[0].deaths, 6);
        assert_eq!(recs[0].country_name, "Afghanistan");
        assert_eq!(recs[0].geo_id, "AF");
        assert_eq!(recs[0].population, Some(38041754));
    }

    #[test]
    fn header_only_gives_no_records() {
        let recs = parse_reader(HEADER.as_bytes(), &ColumnMapping::default()).unwrap();
        assert!(recs.is_empty());
    }

    #[test]
    fn negative_corrections_survive_parsing() {
        let text = format!("{HEADER}02/05/2020,2,5,2020,-5,0,Spain,ES,ESP,,Europe,\n");
        let recs = parse_reader(text.as_bytes(), &ColumnMapping::default()).unwrap();
        assert_eq!(recs[0].cases, -5);
        assert_eq!(recs[0].population, None);
    }

    #[test]
    fn bad_cases_field_reports_line() {
        let text = format!(
            "{HEADER}01/05/2020,1,5,2020,3,0,Spain,ES,ESP,1,Europe,\n02/05/2020,2,5,2020,x,0,Spain,ES,ESP,1,Europe,\n"
        );
        match parse_reader(text.as_bytes(), &ColumnMapping::default()) {
            Err(IngestError::Row { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("cases"));
            }
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn bad_date_is_a_row_error() {
        let text = format!("{HEADER}31/02/2020,31,2,2020,3,0,Spain,ES,ESP,1,Europe,\n");
        assert!(matches!(
            parse_reader(text.as_bytes(), &ColumnMapping::default()),
            Err(IngestError::Row { line: 2, .. })
        ));
    }

    #[test]
    fn missing_cases_column_is_schema_error() {
        let text = "dateRep,day,month,year,deaths,countriesAndTerritories,geoId\n";
        assert!(matches!(
            parse_reader(text.as_bytes(), &ColumnMapping::default()),
            Err(IngestError::Schema(_))
        ));
    }

    #[test]
    fn falls_back_to_date_column_and_custom_names() {
        let mapping = ColumnMapping {
            date: "when".into(),
            cases: "new".into(),
            country: "name".into(),
            geo_id: "code".into(),
            ..ColumnMapping::default()
        };
        let text = "when,new,name,code\n03/04/2020,12,Chile,CL\n";
        let recs = parse_reader(text.as_bytes(), &mapping).unwrap();
        assert_eq!(recs[0].report_date, d(2020, 4, 3));
        assert_eq!(recs[0].cases, 12);
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            parse_csv("/definitely/not/here.csv"),
            Err(IngestError::Io { .. })
        ));
    }

    #[test]
    fn gaps_are_zero_filled() {
        let recs = vec![rec(d(2020, 3, 3), "Spain", 7), rec(d(2020, 3, 1), "Spain", 5)];
        let s = build_series(&recs, "Spain").unwrap();
        assert_eq!(s.start_date, d(2020, 3, 1));
        assert_eq!(s.values, vec![5.0, 0.0, 7.0]);
    }

    #[test]
    fn duplicate_dates_are_summed() {
        let recs = vec![rec(d(2020, 3, 1), "Spain", 5), rec(d(2020, 3, 1), "Spain", 2)];
        assert_eq!(build_series(&recs, "Spain").unwrap().values, vec![7.0]);
    }

    #[test]
    fn unknown_country_is_not_found() {
        let recs = vec![rec(d(2020, 3, 1), "Spain", 5)];
        assert!(matches!(
            build_series(&recs, "France"),
            Err(IngestError::CountryNotFound(_))
        ));
    }

    #[test]
    fn series_is_addressable_by_geo_id() {
        let recs = vec![rec(d(2020, 3, 1), "Spain", 5)];
        assert_eq!(build_series(&recs, "SP").unwrap().country, "Spain");
    }

    fn flat(country: &str, start: NaiveDate, days: usize, daily: f64) -> CaseSeries {
        CaseSeries::new(country, start, vec![daily; days])
    }

    #[test]
    fn selection_filters_by_span_and_ranks_by_cumulative() {
        let as_of = d(2020, 11, 30);
        let set = vec![
            flat("Old", d(2020, 1, 1), 400, 10.0),
            flat("Big", d(2020, 3, 1), 300, 100.0),
            flat("Young", d(2020, 6, 1), 200, 1000.0),
            flat("Tie", d(2020, 1, 1), 400, 10.0),
        ];
        let sel = select_countries(&set, as_of, 8, 50);
        assert_eq!(sel.eligible_count, 3);
        assert_eq!(sel.selected, vec!["Big", "Old", "Tie"]);

        let top1 = select_countries(&set, as_of, 8, 1);
        assert_eq!(top1.selected, vec!["Big"]);
        assert!(select_countries(&set, as_of, 8, 0).selected.is_empty());
    }

    #[test]
    fn eligibility_boundary_is_240_days() {
        let as_of = d(2020, 11, 30);
        let start_ok = as_of - Duration::days(239);
        let start_short = as_of - Duration::days(238);
        let set = vec![flat("A", start_ok, 300, 1.0), flat("B", start_short, 300, 1.0)];
        assert_eq!(select_countries(&set, as_of, 8, 50).selected, vec!["A"]);
    }

    #[test]
    fn cumulative_ignores_days_after_as_of() {
        let s = CaseSeries::new("X", d(2020, 1, 1), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.cumulative_until(d(2020, 1, 2)), 3.0);
        assert_eq!(s.cumulative_until(d(2019, 12, 31)), 0.0);
        assert_eq!(s.cumulative_until(d(2021, 1, 1)), 10.0);
    }
}
