// The batch regressors on one multi-country hold-out split.

use epistream::evaluate::run_holdout;
use epistream::experiment::{Dataset, DefaultFactory, ModelFactory, RunConfig};
use epistream::synthetic::{synthetic_records, SyntheticSpec};

pub fn run() -> anyhow::Result<Vec<(String, f64)>> {
    let mut config = RunConfig::default();
    config.algorithms.forest.n_trees = 30;
    let data = Dataset::from_records(&synthetic_records(&SyntheticSpec::default()), &config)?;
    let milestone = data.milestones()[5];
    let split = data.merged_split(milestone);
    println!("milestone {milestone}: {} train, {} test examples", split.train.len(), split.test.len());

    let factory = DefaultFactory::new(config.algorithms.clone());
    let mut out = Vec::new();
    for name in ["ols", "ridge", "cart", "forest", "gbrt", "svr"] {
        let mut model = factory.build(name, 1)?;
        let r = run_holdout(model.as_mut(), &split.train, &split.test)?;
        println!(
            "{name:<7} MAPE {:>8.2}  MAE {:>9.2}  RMSE {:>9.2}  {:.3}s",
            r.mape.unwrap_or(f64::NAN),
            r.mae,
            r.rmse,
            r.wall_seconds
        );
        out.push((name.to_string(), r.mae));
    }
    Ok(out)
}

fn main() -> anyhow::Result<()> {
    run()?;
    Ok(())
}
