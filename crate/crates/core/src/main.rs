use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use epistream::experiment::output::write_mode_comparison;
use epistream::experiment::{
    ingest_check, run_all, run_experiment_1, run_experiment_2, run_experiment_3, run_significance,
    runner::significance_pairs, write_experiment, write_significance, Dataset, DefaultFactory,
    ExperimentError, ExperimentOutput, ResultsTable, RunConfig,
};

#[derive(Parser)]
#[command(name = "epistream", version, about = "Forecast COVID-19 case counts with online and batch regressors")]
struct Cli {
    /// TOML configuration file. Every key has a default.
    #[arg(long, global = true, env = "EPISTREAM_CONFIG")]
    config: Option<PathBuf>,

    /// Override one config key, e.g. `--set run.seeds=[1,2]`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the data file and report the selected countries.
    IngestCheck,
    /// Single-country hold-out comparison of every algorithm.
    Exp1,
    /// Multi-country hold-out comparison of every algorithm.
    Exp2,
    /// Prequential against hold-out for the online learners.
    Exp3,
    /// Pairwise significance tests on an existing results table.
    Significance {
        /// Results CSV; defaults to `significance.results`, then
        /// `<output_dir>/exp1/results.csv`.
        #[arg(long)]
        results: Option<PathBuf>,
        /// Where to write the test table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// All three experiments, the significance tests and the mode comparison.
    All,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    let config = RunConfig::load(cli.config.as_deref(), &cli.overrides)?;
    let out_dir = config.run.output_dir.clone();
    let factory = DefaultFactory::new(config.algorithms.clone());
    match cli.command {
        Command::IngestCheck => {
            let summary = ingest_check(&config)?;
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
        }
        Command::Exp1 => {
            let data = Dataset::load(&config)?;
            finish(&out_dir, run_experiment_1(&config, &data, &factory)?)?;
        }
        Command::Exp2 => {
            let data = Dataset::load(&config)?;
            finish(&out_dir, run_experiment_2(&config, &data, &factory)?)?;
        }
        Command::Exp3 => {
            let data = Dataset::load(&config)?;
            finish(&out_dir, run_experiment_3(&config, &data, &factory)?)?;
        }
        Command::Significance { results, out } => {
            let path = results
                .or_else(|| config.significance.results.clone())
                .unwrap_or_else(|| out_dir.join("exp1").join("results.csv"));
            let file = File::open(&path).map_err(|e| {
                ExperimentError::Data(format!("cannot open results {}: {e}", path.display()))
            })?;
            let table = ResultsTable::read_csv(file)?;
            let pairs = significance_pairs(&config, &table);
            let outcomes = run_significance(&table, &pairs, config.significance.normality_alpha);
            let out = out.unwrap_or_else(|| out_dir.join("significance.csv"));
            write_significance(&out, &outcomes)?;
            log::info!("{} comparisons written to {}", outcomes.len(), out.display());
        }
        Command::All => {
            let data = Dataset::load(&config)?;
            let all = run_all(&config, &data, &factory)?;
            finish(&out_dir, all.exp1)?;
            finish(&out_dir, all.exp2)?;
            finish(&out_dir, all.exp3)?;
            write_significance(&out_dir.join("significance.csv"), &all.significance)?;
            write_mode_comparison(&out_dir.join("modes.csv"), &all.modes)?;
        }
    }
    Ok(())
}

fn finish(out_dir: &std::path::Path, output: ExperimentOutput) -> Result<(), ExperimentError> {
    let dir = out_dir.join(&output.name);
    write_experiment(&dir, &output)?;
    for row in output.table.summary().iter().take(10) {
        println!(
            "{:<8} {:<3} {:<11} MAPE {:>8}  MAE {:>10.2}  RMSE {:>10.2}",
            row.algorithm,
            row.mode.label(),
            row.scheme.label(),
            row.mape.map_or("n/a".to_string(), |m| format!("{m:.2}")),
            row.mae,
            row.rmse
        );
    }
    log::info!("{} written to {}", output.name, dir.display());
    Ok(())
}
