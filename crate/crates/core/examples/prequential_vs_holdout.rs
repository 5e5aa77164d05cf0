// Scores the online learners both ways on the same test window: hold-out
// freezes the model at the milestone, prequential keeps learning.

use epistream::evaluate::{run_holdout, run_prequential, ScoreWindow};
use epistream::experiment::{Dataset, DefaultFactory, ModelFactory, RunConfig, ONLINE_ALGORITHMS};
use epistream::synthetic::{synthetic_records, SyntheticSpec};

pub fn run() -> anyhow::Result<Vec<(String, f64, f64)>> {
    let config = RunConfig::default();
    let data = Dataset::from_records(&synthetic_records(&SyntheticSpec::default()), &config)?;
    let factory = DefaultFactory::new(config.algorithms.clone());
    let milestone = data.milestones()[4];
    let split = data.merged_split(milestone);
    let window = ScoreWindow::after_milestone(milestone, config.milestones.test_span_days);

    let mut out = Vec::new();
    for name in ONLINE_ALGORITHMS {
        let h = run_holdout(factory.build(name, 1)?.as_mut(), &split.train, &split.test)?;
        let p = run_prequential(factory.build(name, 1)?.as_mut(), &split.train, &split.test, window)?;
        println!("{name:<4} hold-out MAE {:>9.2}   prequential MAE {:>9.2}", h.mae, p.mae);
        out.push((name.to_string(), h.mae, p.mae));
    }
    Ok(out)
}

fn main() -> anyhow::Result<()> {
    run()?;
    Ok(())
}
