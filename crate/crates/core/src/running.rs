//! Weighted running mean and variance.

use serde::{Deserialize, Serialize};

/// Weighted Welford accumulator. `m2` is the weighted sum of squared
/// deviations from the mean.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    pub n: f64,
    pub mean: f64,
    pub m2: f64,
}

impl RunningStats {
    pub fn update(&mut self, x: f64, weight: f64) {
        if weight <= 0.0 {
            return;
        }
        self.n += weight;
        let delta = x - self.mean;
        self.mean += weight * delta / self.n;
        self.m2 += weight * delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if other.n <= 0.0 {
            return *self;
        }
        if self.n <= 0.0 {
            return *other;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        if self.n > 0.0 {
            (self.m2 / self.n).max(0.0)
        } else {
            0.0
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// `(x - mean) / std`, or 0 when the spread is degenerate.
    pub fn standardize(&self, x: f64) -> f64 {
        let sd = self.std_dev();
        if sd > 0.0 {
            (x - self.mean) / sd
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn merge_matches_sequential(
            a in prop::collection::vec(-1e4f64..1e4, 0..40),
            b in prop::collection::vec(-1e4f64..1e4, 0..40),
        ) {
            let mut left = RunningStats::default();
            let mut right = RunningStats::default();
            let mut all = RunningStats::default();
            for &x in &a { left.update(x, 1.0); all.update(x, 1.0); }
            for &x in &b { right.update(x, 1.0); all.update(x, 1.0); }
            let merged = left.merge(&right);
            prop_assert!((merged.n - all.n).abs() < 1e-9);
            prop_assert!((merged.mean - all.mean).abs() < 1e-6);
            prop_assert!((merged.m2 - all.m2).abs() <= 1e-6 * all.m2.max(1.0));
        }
    }

    #[test]
    fn weights_act_as_repeats() {
        let mut w = RunningStats::default();
        w.update(2.0, 3.0);
        w.update(5.0, 1.0);
        let mut r = RunningStats::default();
        for x in [2.0, 2.0, 2.0, 5.0] {
            r.update(x, 1.0);
        }
        assert!((w.mean - r.mean).abs() < 1e-12);
        assert!((w.variance() - r.variance()).abs() < 1e-12);
    }
}
