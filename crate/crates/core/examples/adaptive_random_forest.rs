// Adaptive random forest on a drifting stream, reporting member
// replacements.

use epistream::online::{AdaptiveRandomForestRegressor, ArfConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run() -> anyhow::Result<(f64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut arf = AdaptiveRandomForestRegressor::new(ArfConfig {
        ensemble_size: 6,
        seed: 11,
        ..ArfConfig::default()
    })?;
    let mut recent = 0.0;
    for t in 0..8000 {
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..1.0)).collect();
        let y = if t < 4000 { 8.0 * x[1] } else { 8.0 * (1.0 - x[4]) } + rng.random_range(-0.2..0.2);
        if t >= 7000 {
            recent += (arf.predict(&x)? - y).abs();
        }
        arf.learn(&x, y)?;
    }
    let mae = recent / 1000.0;
    println!(
        "last 1000 MAE {mae:.3}; {} background trees started, {} members replaced",
        arf.background_starts(),
        arf.replacements()
    );
    Ok((mae, arf.replacements()))
}

fn main() -> anyhow::Result<()> {
    run()?;
    Ok(())
}
