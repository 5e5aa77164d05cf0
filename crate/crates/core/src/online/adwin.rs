//! ADWIN change detector over a stream of reals.
//!
//! The window is kept as an exponential histogram: row `i` holds buckets
//! summarizing `2^i` consecutive items, at most `max_buckets` per row. Every
//! `clock` insertions the detector scans all bucket boundaries and drops the
//! oldest bucket while some split of the window into an older and a newer
//! part shows means that differ by more than the cut threshold.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::model::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Bucket {
    total: f64,
    /// Sum of squared deviations from the bucket mean.
    m2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdwinUpdate {
    pub drift: bool,
    pub width_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adwin {
    delta: f64,
    clock: u64,
    max_buckets: usize,
    min_window: usize,
    rows: Vec<VecDeque<Bucket>>,
    width: usize,
    total: f64,
    m2: f64,
    seen: u64,
    detections: u64,
}

impl Default for Adwin {
    fn default() -> Self {
        Self::new(0.002)
    }
}

impl Adwin {
    pub fn new(delta: f64) -> Self {
        Self::with_options(delta, 32, 5, 5)
    }

    /// `clock`: insertions between cut checks. `max_buckets`: buckets kept per
    /// row before two are merged. `min_window`: minimum length of each side
    /// of a cut.
    pub fn with_options(delta: f64, clock: u64, max_buckets: usize, min_window: usize) -> Self {
        assert!(delta > 0.0 && delta < 1.0, "delta must be in (0, 1)");
        assert!(clock >= 1 && max_buckets >= 1 && min_window >= 1);
        Self {
            delta,
            clock,
            max_buckets,
            min_window,
            rows: Vec::new(),
            width: 0,
            total: 0.0,
            m2: 0.0,
            seen: 0,
            detections: 0,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Mean of the retained window, 0 when empty.
    pub fn estimation(&self) -> f64 {
        if self.width > 0 {
            self.total / self.width as f64
        } else {
            0.0
        }
    }

    pub fn variance(&self) -> f64 {
        if self.width > 0 {
            self.m2 / self.width as f64
        } else {
            0.0
        }
    }

    pub fn items_seen(&self) -> u64 {
        self.seen
    }

    pub fn detections(&self) -> u64 {
        self.detections
    }

    pub fn bucket_count(&self) -> usize {
        self.rows.iter().map(VecDeque::len).sum()
    }

    pub fn update(&mut self, value: f64) -> Result<AdwinUpdate, ModelError> {
        if !value.is_finite() {
            return Err(ModelError::NonFinite);
        }
        self.insert(value);
        self.seen += 1;
        let drift = self.seen.is_multiple_of(self.clock) && self.width > 2 * self.min_window && self.shrink();
        if drift {
            self.detections += 1;
        }
        Ok(AdwinUpdate {
            drift,
            width_after: self.width,
        })
    }

    fn insert(&mut self, value: f64) {
        self.width += 1;
        if self.width > 1 {
            let prev = (self.width - 1) as f64;
            let diff = value - self.total / prev;
            self.m2 += prev * diff * diff / self.width as f64;
        }
        self.total += value;
        if self.rows.is_empty() {
            self.rows.push(VecDeque::new());
        }
        self.rows[0].push_back(Bucket { total: value, m2: 0.0 });
        self.compress();
    }

    fn compress(&mut self) {
        let mut row = 0;
        while row < self.rows.len() && self.rows[row].len() > self.max_buckets {
            let a = self.rows[row].pop_front().expect("row over capacity");
            let b = self.rows[row].pop_front().expect("row over capacity");
            let n = (1u64 << row) as f64;
            let diff = a.total / n - b.total / n;
            let merged = Bucket {
                total: a.total + b.total,
                m2: a.m2 + b.m2 + n * diff * diff / 2.0,
            };
            if row + 1 == self.rows.len() {
                self.rows.push(VecDeque::new());
            }
            self.rows[row + 1].push_back(merged);
            row += 1;
        }
    }

    fn drop_oldest(&mut self) {
        let last = self.rows.len() - 1;
        let bucket = self.rows[last].pop_front().expect("non-empty window");
        if self.rows[last].is_empty() {
            self.rows.pop();
        }
        let n1 = (1usize << last) as f64;
        self.width -= 1 << last;
        self.total -= bucket.total;
        if self.width == 0 {
            self.total = 0.0;
            self.m2 = 0.0;
            return;
        }
        let rest = self.width as f64;
        let diff = bucket.total / n1 - self.total / rest;
        self.m2 -= bucket.m2 + n1 * rest * diff * diff / (n1 + rest);
        self.m2 = self.m2.max(0.0);
    }

    /// Drops old buckets while a significant cut exists. Returns whether any
    /// bucket was dropped.
    fn shrink(&mut self) -> bool {
        let mut changed = false;
        while self.width > 2 * self.min_window && self.find_cut() {
            self.drop_oldest();
            changed = true;
        }
        changed
    }

    fn find_cut(&self) -> bool {
        let mut n0 = 0usize;
        let mut u0 = 0.0;
        let mut n1 = self.width;
        let mut u1 = self.total;
        for (row, buckets) in self.rows.iter().enumerate().rev() {
            let size = 1usize << row;
            for b in buckets {
                n0 += size;
                n1 -= size;
                u0 += b.total;
                u1 -= b.total;
                if n1 == 0 {
                    return false;
                }
                if n0 >= self.min_window && n1 >= self.min_window {
                    let diff = u0 / n0 as f64 - u1 / n1 as f64;
                    if self.exceeds_bound(n0, n1, diff) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn exceeds_bound(&self, n0: usize, n1: usize, diff: f64) -> bool {
        let n = self.width as f64;
        let dd = (2.0 * n.ln() / self.delta).ln();
        let slack = (self.min_window - 1) as f64;
        let m = 1.0 / (n0 as f64 - slack) + 1.0 / (n1 as f64 - slack);
        let eps = (2.0 * m * self.variance() * dd).sqrt() + 2.0 / 3.0 * dd * m;
        diff.abs() > eps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_stream_never_drifts() {
        let mut a = Adwin::new(0.002);
        for _ in 0..10_000 {
            assert!(!a.update(0.7).unwrap().drift);
        }
        assert_eq!(a.width(), 10_000);
        assert!((a.estimation() - 0.7).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = Adwin::default();
        assert_eq!(a.update(f64::NAN), Err(ModelError::NonFinite));
        assert_eq!(a.update(f64::INFINITY), Err(ModelError::NonFinite));
        assert_eq!(a.width(), 0);
    }

    #[test]
    fn window_statistics_match_direct_computation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut a = Adwin::with_options(1e-9, 1_000_000, 5, 5);
        let values: Vec<f64> = (0..777).map(|_| rng.random::<f64>() * 10.0).collect();
        for &v in &values {
            a.update(v).unwrap();
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
        assert_eq!(a.width(), 777);
        assert!((a.estimation() - mean).abs() < 1e-9);
        assert!((a.variance() - var).abs() < 1e-9);
        assert!(a.bucket_count() <= 5 * 10 + 1);
    }

    #[test]
    fn abrupt_shift_cuts_old_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut a = Adwin::new(0.002);
        let mut first_drift = None;
        for t in 0..2000 {
            let p = if t < 1000 { 0.2 } else { 0.8 };
            let x = if rng.random::<f64>() < p { 1.0 } else { 0.0 };
            if a.update(x).unwrap().drift && t >= 1000 && first_drift.is_none() {
                first_drift = Some(t);
            }
        }
        let t = first_drift.expect("shift detected");
        assert!(t - 1000 <= 150, "delay {}", t - 1000);
        assert!(a.width() < 1500);
        assert!(a.estimation() > 0.6);
    }
}
