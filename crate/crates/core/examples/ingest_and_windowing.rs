// From a daily CSV to supervised examples and milestone splits.
//
//     cargo run --example ingest_and_windowing -- path/to/ecdc_daily.csv
//
// Without an argument a synthetic file is generated first.

use std::fs::File;
use std::path::PathBuf;

use chrono::NaiveDate;
use epistream::ingest::{build_all_series, parse_csv, select_countries, write_csv};
use epistream::synthetic::{synthetic_records, SyntheticSpec};
use epistream::windowing::{make_examples, make_schedule, split_at, WindowParams};

pub struct Summary {
    pub countries: usize,
    pub examples: usize,
    pub milestones: usize,
}

pub fn run(path: Option<PathBuf>) -> anyhow::Result<Summary> {
    let path = match path {
        Some(p) => p,
        None => {
            let p = std::env::temp_dir().join("epistream_example_cases.csv");
            write_csv(&synthetic_records(&SyntheticSpec::default()), File::create(&p)?)?;
            p
        }
    };
    let records = parse_csv(&path)?;
    let all = build_all_series(&records);
    let as_of = NaiveDate::from_ymd_opt(2020, 11, 30).unwrap();
    let selection = select_countries(&all, as_of, 8, 50);
    println!(
        "{} records, {} countries, {} eligible, {} selected",
        records.len(),
        all.len(),
        selection.eligible_count,
        selection.selected.len()
    );

    let params = WindowParams::default();
    let chosen: Vec<_> = all.into_iter().filter(|s| selection.selected.contains(&s.country)).collect();
    let final_milestone = NaiveDate::from_ymd_opt(2020, 10, 31).unwrap();
    let schedule = make_schedule(&chosen, params, 8, 30, final_milestone)?;

    let mut total = 0;
    for s in &chosen {
        let ex = make_examples(s, params);
        total += ex.len();
        let sizes: Vec<String> = schedule
            .milestones
            .iter()
            .map(|&m| {
                let split = split_at(&ex, m, schedule.test_span_days);
                format!("{}/{}", split.train.len(), split.test.len())
            })
            .collect();
        println!("{:<10} {:>3} days {:>3} examples  train/test {}", s.country, s.len(), ex.len(), sizes.join(" "));
    }
    Ok(Summary {
        countries: chosen.len(),
        examples: total,
        milestones: schedule.milestones.len(),
    })
}

fn main() -> anyhow::Result<()> {
    let s = run(std::env::args().nth(1).map(PathBuf::from))?;
    println!("{} examples over {} countries, {} milestones", s.examples, s.countries, s.milestones);
    Ok(())
}
