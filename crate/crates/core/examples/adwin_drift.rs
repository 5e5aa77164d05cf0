// ADWIN watching a Bernoulli stream whose rate jumps from 0.2 to 0.8.

use epistream::online::Adwin;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Returns the index of every detection.
pub fn run() -> anyhow::Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut adwin = Adwin::new(0.002);
    let mut detections = Vec::new();
    for t in 0..3000 {
        let p = if t < 1500 { 0.2 } else { 0.8 };
        let x = if rng.random::<f64>() < p { 1.0 } else { 0.0 };
        let update = adwin.update(x)?;
        if update.drift {
            println!("t={t:>4}  drift, window now {} wide, mean {:.3}", update.width_after, adwin.estimation());
            detections.push(t);
        }
    }
    println!("final window {} wide, mean {:.3}", adwin.width(), adwin.estimation());
    Ok(detections)
}

fn main() -> anyhow::Result<()> {
    run()?;
    Ok(())
}
