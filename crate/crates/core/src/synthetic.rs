//! Seeded ECDC-shaped data for demos and tests.
//!
//! Each country gets a few Gaussian-shaped epidemic waves, a weekly reporting
//! dip, Poisson noise and the occasional negative correction. Rows come out
//! grouped by country with dates descending, like the published file, and
//! zero-count days are omitted.

use chrono::{Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::ingest::RawDailyRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_countries: usize,
    pub first_date: NaiveDate,
    pub last_date: NaiveDate,
    /// How many of the countries start reporting too late to have eight
    /// months of data by the last date.
    pub late_starters: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_countries: 8,
            first_date: NaiveDate::from_ymd_opt(2019, 12, 31).expect("valid date"),
            last_date: NaiveDate::from_ymd_opt(2020, 12, 14).expect("valid date"),
            late_starters: 1,
            seed: 7,
        }
    }
}

pub fn country_name(i: usize) -> String {
    format!("Country{:02}", i + 1)
}

struct Wave {
    center: f64,
    width: f64,
    peak: f64,
}

pub fn synthetic_records(spec: &SyntheticSpec) -> Vec<RawDailyRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let days = (spec.last_date - spec.first_date).num_days() + 1;
    let mut out = Vec::new();
    for c in 0..spec.n_countries {
        let late = c >= spec.n_countries.saturating_sub(spec.late_starters);
        let offset = if late {
            days - rng.random_range(150..200)
        } else if c == 0 {
            0
        } else {
            rng.random_range(0..60)
        };
        let scale = 10f64.powf(rng.random_range(2.0..4.0));
        let waves: Vec<Wave> = (0..rng.random_range(2..=3))
            .map(|k| Wave {
                center: rng.random_range(60.0..days as f64) + 30.0 * k as f64,
                width: rng.random_range(12.0..45.0),
                peak: scale * rng.random_range(0.3..1.5),
            })
            .collect();
        let population: u64 = rng.random_range(1_000_000..80_000_000);
        let name = country_name(c);
        let geo = format!("C{:02}", c + 1);
        let mut rows = Vec::new();
        for t in offset..days {
            let tf = t as f64;
            let weekly = if t % 7 == 5 { 0.6 } else { 1.0 };
            let lambda: f64 = weekly
                * (1.0 + waves
                    .iter()
                    .map(|w| w.peak * (-(tf - w.center).powi(2) / (2.0 * w.width * w.width)).exp())
                    .sum::<f64>());
            let mut cases = Poisson::new(lambda).expect("positive rate").sample(&mut rng) as i64;
            if rng.random::<f64>() < 0.003 {
                cases = -(rng.random_range(1..=(lambda as i64).max(2)));
            }
            if t == offset {
                // the first report is what starts the series
                cases = cases.max(1);
            } else if cases == 0 {
                continue;
            }
            rows.push(RawDailyRecord {
                report_date: spec.first_date + Duration::days(t),
                country_name: name.clone(),
                geo_id: geo.clone(),
                cases,
                deaths: (cases.max(0) as f64 * 0.02) as i64,
                population: Some(population),
            });
        }
        rows.reverse();
        out.extend(rows);
    }
    out
}
