// Saves a trained model to JSON and keeps learning from the restored copy.

use std::path::{Path, PathBuf};

use epistream::model::Regressor;
use epistream::online::HoeffdingAdaptiveTreeRegressor;
use epistream::snapshot::{snapshot_of, ModelSnapshot};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run(path: &Path) -> anyhow::Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut model = HoeffdingAdaptiveTreeRegressor::default();
    let mut sample = || {
        let x: Vec<f64> = (0..3).map(|_| rng.random::<f64>()).collect();
        let y = 5.0 * x[0] + if x[1] > 0.5 { 3.0 } else { 0.0 };
        (x, y)
    };
    for _ in 0..2000 {
        let (x, y) = sample();
        model.learn_one(&x, y)?;
    }
    let snap = snapshot_of(&model)?;
    snap.save(path)?;
    println!("{} snapshot: {} bytes", snap.kind(), std::fs::metadata(path)?.len());

    let mut restored = ModelSnapshot::load(path)?.into_regressor();
    let probe = [0.7, 0.9, 0.1];
    let before = (model.predict_one(&probe)?, restored.predict_one(&probe)?);
    println!("prediction before / after restore: {:.4} / {:.4}", before.0, before.1);
    for _ in 0..500 {
        let (x, y) = sample();
        restored.learn_one(&x, y)?;
    }
    Ok(before)
}

fn main() -> anyhow::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("hat.json"));
    run(&path)?;
    Ok(())
}
