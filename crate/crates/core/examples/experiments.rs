// All three experiments on synthetic countries, written to a results
// directory.
//
//     cargo run --release --example experiments -- results/demo

use std::path::{Path, PathBuf};

use epistream::experiment::output::write_mode_comparison;
use epistream::experiment::{run_all, write_experiment, write_significance, AllOutput, Dataset, DefaultFactory, RunConfig};
use epistream::synthetic::{synthetic_records, SyntheticSpec};

pub fn run(out: &Path, quick: bool) -> anyhow::Result<AllOutput> {
    let mut config = RunConfig::default();
    config.run.record_timing = false;
    config.run.output_dir = out.to_path_buf();
    if quick {
        config.milestones.count = 2;
        config.run.seeds = vec![1];
        config.algorithms.forest.n_trees = 10;
        config.algorithms.gbrt.n_stages = 20;
        config.algorithms.svr.epochs = 50;
    }
    let spec = SyntheticSpec {
        n_countries: 10,
        ..SyntheticSpec::default()
    };
    let data = Dataset::from_records(&synthetic_records(&spec), &config)?;
    let all = run_all(&config, &data, &DefaultFactory::new(config.algorithms.clone()))?;
    for exp in [&all.exp1, &all.exp2, &all.exp3] {
        write_experiment(&out.join(&exp.name), exp)?;
        let best = &exp.table.summary()[0];
        println!("{}: best {} {} (MAPE {:.2})", exp.name, best.algorithm, best.scheme.label(), best.mape.unwrap_or(f64::NAN));
    }
    write_significance(&out.join("significance.csv"), &all.significance)?;
    write_mode_comparison(&out.join("modes.csv"), &all.modes)?;
    for m in &all.modes {
        println!(
            "{:<7} median MAPE  SC {:>8.2}  MC {:>8.2}",
            m.algorithm,
            m.sc_median_mape.unwrap_or(f64::NAN),
            m.mc_median_mape.unwrap_or(f64::NAN)
        );
    }
    Ok(all)
}

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "results/demo".into());
    run(&out, false)?;
    println!("written to {}", out.display());
    Ok(())
}
