//! Regression trees grown by exhaustive search over every attribute and
//! every midpoint between distinct adjacent values.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, validate_training};
use crate::model::{ModelError, Regressor};
use crate::snapshot::ModelSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CartParams {
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Attributes drawn per node; `None` searches all of them.
    pub max_features: Option<usize>,
}

impl Default for CartParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CartNode {
    Leaf {
        value: f64,
        samples: usize,
    },
    Split {
        attribute: usize,
        /// Rows with `x[attribute] <= threshold` go left.
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartTree {
    pub params: CartParams,
    pub dim: usize,
    /// Node 0 is the root; empty until fitted.
    pub nodes: Vec<CartNode>,
}

impl CartTree {
    pub fn new(params: CartParams) -> Self {
        Self {
            params,
            dim: 0,
            nodes: Vec::new(),
        }
    }

    pub fn predict(&self, features: &[f64]) -> Result<f64, ModelError> {
        if self.nodes.is_empty() {
            return Ok(0.0);
        }
        check_dim(self.dim, features.len())?;
        Ok(self.predict_unchecked(features))
    }

    pub(crate) fn predict_unchecked(&self, features: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                CartNode::Leaf { value, .. } => return value,
                CartNode::Split {
                    attribute,
                    threshold,
                    left,
                    right,
                } => i = if features[attribute] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, CartNode::Leaf { .. }))
            .count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[CartNode], i: usize) -> usize {
            match nodes[i] {
                CartNode::Leaf { .. } => 0,
                CartNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(&self.nodes, 0)
        }
    }
}

pub fn fit_cart(rows: &[&[f64]], targets: &[f64], params: CartParams) -> Result<CartTree, ModelError> {
    fit_cart_with_rng(rows, targets, params, &mut ChaCha8Rng::seed_from_u64(0))
}

/// As [`fit_cart`], drawing per-node attribute subsets from `rng` when
/// `params.max_features` is below the dimension. The rng is untouched when
/// every attribute is searched.
pub fn fit_cart_with_rng<R: Rng + ?Sized>(
    rows: &[&[f64]],
    targets: &[f64],
    params: CartParams,
    rng: &mut R,
) -> Result<CartTree, ModelError> {
    let dim = validate_training(rows, targets)?;
    if params.min_samples_leaf == 0 || params.min_samples_split < 2 {
        return Err(ModelError::Config(
            "min_samples_leaf must be >= 1 and min_samples_split >= 2".into(),
        ));
    }
    if params.max_features == Some(0) {
        return Err(ModelError::Config("max_features must be >= 1".into()));
    }
    let mut builder = Builder {
        rows,
        targets,
        params,
        dim,
        nodes: Vec::new(),
        scratch: Vec::with_capacity(rows.len()),
    };
    let mut idx: Vec<usize> = (0..rows.len()).collect();
    builder.grow(&mut idx, 0, rng);
    Ok(CartTree {
        params,
        dim,
        nodes: builder.nodes,
    })
}

struct Builder<'a> {
    rows: &'a [&'a [f64]],
    targets: &'a [f64],
    params: CartParams,
    dim: usize,
    nodes: Vec<CartNode>,
    scratch: Vec<(f64, f64)>,
}

/// Relative score difference below which two candidate splits tie.
const TIE_TOLERANCE: f64 = 1e-12;

struct BestSplit {
    attribute: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn grow<R: Rng + ?Sized>(&mut self, idx: &mut [usize], depth: usize, rng: &mut R) -> usize {
        let n = idx.len();
        let mean = idx.iter().map(|&i| self.targets[i]).sum::<f64>() / n as f64;
        let me = self.nodes.len();
        self.nodes.push(CartNode::Leaf {
            value: mean,
            samples: n,
        });

        let first = self.targets[idx[0]];
        let pure = idx.iter().all(|&i| self.targets[i] == first);
        let depth_done = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_done || n < self.params.min_samples_split || n < 2 * self.params.min_samples_leaf {
            return me;
        }

        let Some(best) = self.best_split(idx, mean, rng) else {
            return me;
        };
        let (a, t) = (best.attribute, best.threshold);
        let mut cut = 0;
        for k in 0..n {
            if self.rows[idx[k]][a] <= t {
                idx.swap(cut, k);
                cut += 1;
            }
        }
        // keep the original relative order on each side for reproducibility
        idx[..cut].sort_unstable();
        idx[cut..].sort_unstable();
        let (l, r) = idx.split_at_mut(cut);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[me] = CartNode::Split {
            attribute: a,
            threshold: t,
            left,
            right,
        };
        me
    }

    /// Maximizes `S_L²/n_L + S_R²/n_R` over centered targets, which is
    /// equivalent to minimizing the summed squared error of the children.
    /// Ties keep the lowest attribute and then the lowest threshold. Scores
    /// within [`TIE_TOLERANCE`] count as ties: the same partition reached
    /// through different attributes is summed in a different order and can
    /// differ in the last bits.
    fn best_split<R: Rng + ?Sized>(&mut self, idx: &[usize], mean: f64, rng: &mut R) -> Option<BestSplit> {
        let attributes: Vec<usize> = match self.params.max_features {
            Some(m) if m < self.dim => {
                let mut a = sample(rng, self.dim, m).into_vec();
                a.sort_unstable();
                a
            }
            _ => (0..self.dim).collect(),
        };
        let n = idx.len();
        let min_leaf = self.params.min_samples_leaf;
        let mut best: Option<BestSplit> = None;
        for a in attributes {
            self.scratch.clear();
            self.scratch
                .extend(idx.iter().map(|&i| (self.rows[i][a], self.targets[i] - mean)));
            self.scratch.sort_unstable_by(|p, q| p.0.total_cmp(&q.0));
            let total: f64 = self.scratch.iter().map(|p| p.1).sum();
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                left_sum += self.scratch[k].1;
                let (lo, hi) = (self.scratch[k].0, self.scratch[k + 1].0);
                let n_left = k + 1;
                if lo == hi || n_left < min_leaf || n - n_left < min_leaf {
                    continue;
                }
                let right_sum = total - left_sum;
                let score =
                    left_sum * left_sum / n_left as f64 + right_sum * right_sum / (n - n_left) as f64;
                if best.as_ref().is_none_or(|b| score > b.score + TIE_TOLERANCE * b.score) {
                    let mut threshold = lo + (hi - lo) / 2.0;
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some(BestSplit {
                        attribute: a,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }
}

impl Regressor for CartTree {
    fn fit(&mut self, rows: &[&[f64]], targets: &[f64]) -> Result<(), ModelError> {
        *self = fit_cart(rows, targets, self.params)?;
        Ok(())
    }

    fn predict_one(&self, features: &[f64]) -> Result<f64, ModelError> {
        self.predict(features)
    }

    fn snapshot(&self) -> Option<ModelSnapshot> {
        Some(ModelSnapshot::Cart(self.clone()))
    }
}
