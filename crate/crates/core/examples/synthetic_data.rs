// Writes a seeded synthetic case file in the ECDC daily layout.
//
//     cargo run --example synthetic_data -- data/synthetic.csv 12

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use epistream::ingest::{build_all_series, write_csv, CaseSeries};
use epistream::synthetic::{synthetic_records, SyntheticSpec};

pub fn run(path: &Path, n_countries: usize) -> anyhow::Result<Vec<CaseSeries>> {
    let spec = SyntheticSpec {
        n_countries,
        ..SyntheticSpec::default()
    };
    let records = synthetic_records(&spec);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_csv(&records, File::create(path)?)?;
    println!("{} rows -> {}", records.len(), path.display());
    Ok(build_all_series(&records))
}

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "data/synthetic.csv".into()));
    let n_countries = args.next().map(|s| s.parse()).transpose()?.unwrap_or(8);
    for s in run(&path, n_countries)? {
        let total: f64 = s.values.iter().sum();
        println!("{:<10} {} .. {}  {:>9.0} cases", s.country, s.start_date, s.end_date(), total);
    }
    Ok(())
}
