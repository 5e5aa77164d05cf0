// The three passive-aggressive step rules tracking a noisy linear target.

use epistream::online::{PaConfig, PaVariant, PassiveAggressiveRegressor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run() -> anyhow::Result<Vec<(PaVariant, f64)>> {
    let mut out = Vec::new();
    for variant in [PaVariant::Pa, PaVariant::PaI, PaVariant::PaII] {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pa = PassiveAggressiveRegressor::new(PaConfig {
            variant,
            c: 0.1,
            epsilon: 0.1,
            fit_intercept: true,
        })?;
        let mut late = 0.0;
        for t in 0..5000 {
            let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let y = 2.0 * x[0] - x[1] + 0.5 + rng.random_range(-0.3..0.3);
            if t >= 4000 {
                late += pa.loss(&x, y)?;
            }
            pa.update(&x, y)?;
        }
        println!(
            "{variant:?}: weights {:.3?} bias {:.3}, mean late loss {:.4}, {} updates",
            pa.weights(),
            pa.bias(),
            late / 1000.0,
            pa.updates()
        );
        out.push((variant, late / 1000.0));
    }
    Ok(out)
}

fn main() -> anyhow::Result<()> {
    run()?;
    Ok(())
}
