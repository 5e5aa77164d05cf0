//! Candidate split statistics kept at Hoeffding tree leaves.

use serde::{Deserialize, Serialize};

use crate::running::RunningStats;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Bin {
    /// Weighted mean of the attribute values folded into this bin.
    key: f64,
    weight: f64,
    target: RunningStats,
}

/// Bounded histogram of one attribute with per-bin target statistics.
///
/// Bins are exact (one per distinct value) until `capacity` is exceeded;
/// after that the two bins with the closest keys are merged on every new
/// distinct value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericObserver {
    bins: Vec<Bin>,
    capacity: usize,
}

impl NumericObserver {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 2, "observer needs at least two bins");
        Self {
            bins: Vec::new(),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn observe(&mut self, x: f64, y: f64, weight: f64) {
        match self.bins.binary_search_by(|b| b.key.total_cmp(&x)) {
            Ok(i) => {
                let bin = &mut self.bins[i];
                bin.weight += weight;
                bin.target.update(y, weight);
            }
            Err(i) => {
                let mut target = RunningStats::default();
                target.update(y, weight);
                self.bins.insert(
                    i,
                    Bin {
                        key: x,
                        weight,
                        target,
                    },
                );
                if self.bins.len() > self.capacity {
                    self.merge_closest();
                }
            }
        }
    }

    fn merge_closest(&mut self) {
        let i = (0..self.bins.len() - 1)
            .min_by(|&a, &b| {
                let ga = self.bins[a + 1].key - self.bins[a].key;
                let gb = self.bins[b + 1].key - self.bins[b].key;
                ga.total_cmp(&gb)
            })
            .expect("at least two bins");
        let right = self.bins.remove(i + 1);
        let left = &mut self.bins[i];
        let weight = left.weight + right.weight;
        left.key = (left.key * left.weight + right.key * right.weight) / weight;
        left.weight = weight;
        left.target = left.target.merge(&right.target);
    }

    /// Best binary split `x <= threshold` by variance reduction, scanning the
    /// midpoints between adjacent bins. Ties keep the lowest threshold.
    pub fn best_split(&self) -> Option<AttributeSplit> {
        if self.bins.len() < 2 {
            return None;
        }
        let mut suffix = vec![RunningStats::default(); self.bins.len() + 1];
        for i in (0..self.bins.len()).rev() {
            suffix[i] = self.bins[i].target.merge(&suffix[i + 1]);
        }
        let total = suffix[0];
        if total.m2 <= 0.0 {
            return None;
        }
        let mut left = RunningStats::default();
        let mut best: Option<AttributeSplit> = None;
        for i in 0..self.bins.len() - 1 {
            left = left.merge(&self.bins[i].target);
            let right = suffix[i + 1];
            let merit = ((total.m2 - left.m2 - right.m2) / total.m2).clamp(0.0, 1.0);
            if best.as_ref().is_none_or(|b| merit > b.merit) {
                best = Some(AttributeSplit {
                    threshold: (self.bins[i].key + self.bins[i + 1].key) / 2.0,
                    merit,
                    left,
                    right,
                });
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSplit {
    pub threshold: f64,
    /// Variance reduction as a fraction of the total, in `[0, 1]`.
    pub merit: f64,
    pub left: RunningStats,
    pub right: RunningStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitSuggestion {
    pub attribute: usize,
    pub threshold: f64,
    pub merit: f64,
    pub left: RunningStats,
    pub right: RunningStats,
}

/// The observers of one leaf, over the attributes that leaf may split on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSearch {
    attributes: Vec<usize>,
    observers: Vec<NumericObserver>,
}

impl SplitSearch {
    pub fn new(attributes: Vec<usize>, capacity: usize) -> Self {
        let observers = attributes.iter().map(|_| NumericObserver::new(capacity)).collect();
        Self {
            attributes,
            observers,
        }
    }

    pub fn attributes(&self) -> &[usize] {
        &self.attributes
    }

    pub fn observe(&mut self, features: &[f64], y: f64, weight: f64) {
        for (&a, obs) in self.attributes.iter().zip(self.observers.iter_mut()) {
            obs.observe(features[a], y, weight);
        }
    }

    /// Best split per attribute, sorted by merit descending (ties: lowest
    /// attribute first).
    pub fn suggestions(&self) -> Vec<SplitSuggestion> {
        let mut out: Vec<SplitSuggestion> = self
            .attributes
            .iter()
            .zip(&self.observers)
            .filter_map(|(&attribute, obs)| {
                obs.best_split().map(|s| SplitSuggestion {
                    attribute,
                    threshold: s.threshold,
                    merit: s.merit,
                    left: s.left,
                    right: s.right,
                })
            })
            .collect();
        out.sort_by(|a, b| {
            b.merit
                .total_cmp(&a.merit)
                .then_with(|| a.attribute.cmp(&b.attribute))
        });
        out
    }
}

/// `sqrt(R² ln(1/δ) / (2n))`.
pub fn hoeffding_bound(range: f64, confidence: f64, n: f64) -> f64 {
    (range * range * (1.0 / confidence).ln() / (2.0 * n)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_at_reference_point() {
        let eps = hoeffding_bound(1.0, 1e-7, 200.0);
        assert!((eps - 0.200_737).abs() < 1e-6, "{eps}");
    }

    #[test]
    fn step_function_splits_between_levels() {
        let mut obs = NumericObserver::new(16);
        for (x, y) in [(0.0, 0.0), (1.0, 0.0), (2.0, 10.0), (3.0, 10.0)] {
            obs.observe(x, y, 1.0);
        }
        let s = obs.best_split().unwrap();
        assert_eq!(s.threshold, 1.5);
        assert!((s.merit - 1.0).abs() < 1e-12);
        assert_eq!(s.left.mean, 0.0);
        assert_eq!(s.right.mean, 10.0);
    }

    #[test]
    fn constant_target_has_no_split() {
        let mut obs = NumericObserver::new(16);
        for x in 0..10 {
            obs.observe(x as f64, 4.0, 1.0);
        }
        assert!(obs.best_split().is_none());
    }

    #[test]
    fn capacity_is_respected_and_mass_kept() {
        let mut obs = NumericObserver::new(8);
        for x in 0..100 {
            obs.observe(x as f64, x as f64, 1.0);
        }
        assert_eq!(obs.len(), 8);
        let total: f64 = obs.bins.iter().map(|b| b.weight).sum();
        assert_eq!(total, 100.0);
        assert!(obs.bins.windows(2).all(|w| w[0].key < w[1].key));
    }
}
