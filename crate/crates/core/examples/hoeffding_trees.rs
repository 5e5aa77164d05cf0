// Hoeffding tree against its adaptive variant on a stream whose relevant
// attribute changes halfway.

use epistream::model::Regressor;
use epistream::online::{HoeffdingAdaptiveTreeRegressor, HoeffdingTreeRegressor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn target(t: usize, x: &[f64]) -> f64 {
    if t < 5000 {
        if x[0] > 0.5 { 10.0 } else { 0.0 }
    } else if x[2] > 0.3 {
        -5.0
    } else {
        20.0
    }
}

/// Mean absolute prequential error per 1000 examples, for HT and HAT.
pub fn run() -> anyhow::Result<Vec<(f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ht = HoeffdingTreeRegressor::default();
    let mut hat = HoeffdingAdaptiveTreeRegressor::default();
    let mut blocks = Vec::new();
    let (mut e_ht, mut e_hat) = (0.0, 0.0);
    for t in 0..10_000 {
        let x: Vec<f64> = (0..3).map(|_| rng.random()).collect();
        let y = target(t, &x) + rng.random_range(-0.5..0.5);
        e_ht += (ht.predict_one(&x)? - y).abs();
        e_hat += (hat.predict_one(&x)? - y).abs();
        ht.learn_one(&x, y)?;
        hat.learn_one(&x, y)?;
        if (t + 1) % 1000 == 0 {
            blocks.push((e_ht / 1000.0, e_hat / 1000.0));
            (e_ht, e_hat) = (0.0, 0.0);
        }
    }
    println!("block   HT MAE  HAT MAE");
    for (i, (a, b)) in blocks.iter().enumerate() {
        println!("{:>5} {:>8.3} {:>8.3}", i, a, b);
    }
    println!("HT {} leaves; HAT {} leaves, {:?}", ht.n_leaves(), hat.n_leaves(), hat.counters());
    Ok(blocks)
}

fn main() -> anyhow::Result<()> {
    run()?;
    Ok(())
}
