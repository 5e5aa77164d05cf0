//! Hoeffding tree regression, with the adaptive (HAT) variant layered on the
//! same node types.
//!
//! Leaves keep target statistics, one [`SplitSearch`] and a perceptron over
//! standardized inputs. A leaf tries to split every `grace_period` units of
//! weight; it splits when the best variance-reduction merit beats the
//! runner-up by more than the Hoeffding bound, or when the bound itself has
//! fallen under the tie threshold. Merits are fractions of the leaf's target
//! variance, so the bound's range is 1.
//!
//! In adaptive mode every node also tracks its normalized absolute error with
//! an [`Adwin`]. When the error of a split node rises significantly the node
//! starts an alternate subtree; the alternate replaces the node once its own
//! error is lower with statistical support, and is dropped if it is worse.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adwin::Adwin;
use super::split::{hoeffding_bound, SplitSearch, SplitSuggestion};
use crate::model::{check_finite, learn_all, Dimension, ModelError, Regressor};
use crate::running::RunningStats;
use crate::snapshot::ModelSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafPrediction {
    Mean,
    Perceptron,
    /// Whichever of mean and perceptron has the lower running absolute error.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoeffdingTreeConfig {
    pub grace_period: f64,
    /// δ of the Hoeffding bound.
    pub split_confidence: f64,
    /// τ: split anyway once the bound drops below this.
    pub tie_threshold: f64,
    pub leaf_prediction: LeafPrediction,
    pub learning_rate: f64,
    pub learning_rate_decay: f64,
    /// Histogram bins per attribute at each leaf.
    pub max_bins: usize,
    /// Attributes each new leaf may split on, drawn at random. `None` = all.
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for HoeffdingTreeConfig {
    fn default() -> Self {
        Self {
            grace_period: 200.0,
            split_confidence: 1e-7,
            tie_threshold: 0.05,
            leaf_prediction: LeafPrediction::Adaptive,
            learning_rate: 0.02,
            learning_rate_decay: 0.001,
            max_bins: 64,
            max_features: None,
            max_depth: None,
            seed: 42,
        }
    }
}

/// Error bound used when comparing a node against its alternate.
const ALTERNATE_DELTA: f64 = 0.05;
/// Minimum ADWIN width on both sides before an alternate can be judged.
const ALTERNATE_MIN_WIDTH: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Perceptron {
    weights: Vec<f64>,
    inputs: Vec<RunningStats>,
    target: RunningStats,
    updates: f64,
}

impl Perceptron {
    fn new(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim + 1],
            inputs: vec![RunningStats::default(); dim],
            target: RunningStats::default(),
            updates: 0.0,
        }
    }

    fn standardized_output(&self, x: &[f64]) -> f64 {
        let dim = self.inputs.len();
        let mut out = self.weights[dim];
        for ((w, s), &v) in self.weights.iter().zip(&self.inputs).zip(x) {
            out += w * s.standardize(v);
        }
        out
    }

    fn predict(&self, x: &[f64]) -> f64 {
        self.target.mean + self.target.std_dev() * self.standardized_output(x)
    }

    /// Integer part of `weight` counts as repeated unit steps, the remainder
    /// as one scaled step.
    fn learn(&mut self, x: &[f64], y: f64, weight: f64, cfg: &HoeffdingTreeConfig) {
        for (s, &v) in self.inputs.iter_mut().zip(x) {
            s.update(v, weight);
        }
        self.target.update(y, weight);
        let sd = self.target.std_dev();
        if sd <= 0.0 {
            return;
        }
        let dim = self.inputs.len();
        let z: Vec<f64> = self
            .inputs
            .iter()
            .zip(x)
            .map(|(s, &v)| s.standardize(v))
            .chain(std::iter::once(1.0))
            .collect();
        let norm_sq: f64 = z.iter().map(|v| v * v).sum();
        // bounds the change any single step can make to the output
        let scale = ((dim + 1) as f64 / norm_sq).min(1.0);
        let y_std = (y - self.target.mean) / sd;

        let mut remaining = weight;
        while remaining > 0.0 {
            let step_weight = remaining.min(1.0);
            remaining -= step_weight;
            let rate = cfg.learning_rate / (1.0 + self.updates * cfg.learning_rate_decay);
            let err = y_std - self.weights.iter().zip(&z).map(|(w, v)| w * v).sum::<f64>();
            let step = rate * err * scale * step_weight;
            for (w, v) in self.weights.iter_mut().zip(&z) {
                *w += step * v;
            }
            self.updates += step_weight;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ErrorMonitor {
    adwin: Adwin,
}

impl ErrorMonitor {
    fn new() -> Self {
        Self {
            adwin: Adwin::new(0.002),
        }
    }

    fn estimation(&self) -> f64 {
        self.adwin.estimation()
    }

    fn width(&self) -> usize {
        self.adwin.width()
    }
}

/// Maps an absolute error to `[0, 1]` by placing it within the tree-wide
/// mean ± 3 standard deviations of absolute errors.
fn normalized_error(abs_error: f64, norm: &RunningStats) -> f64 {
    let sd = norm.std_dev();
    if sd <= 0.0 {
        return 0.5;
    }
    ((abs_error - (norm.mean - 3.0 * sd)) / (6.0 * sd)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Leaf {
    stats: RunningStats,
    weight_at_last_attempt: f64,
    search: SplitSearch,
    perceptron: Perceptron,
    mean_abs_error: f64,
    model_abs_error: f64,
    depth: usize,
    monitor: Option<ErrorMonitor>,
}

impl Leaf {
    fn predict(&self, x: &[f64], mode: LeafPrediction) -> f64 {
        match mode {
            LeafPrediction::Mean => self.stats.mean,
            LeafPrediction::Perceptron => self.perceptron.predict(x),
            LeafPrediction::Adaptive => {
                if self.model_abs_error < self.mean_abs_error {
                    self.perceptron.predict(x)
                } else {
                    self.stats.mean
                }
            }
        }
    }

    fn learn(&mut self, x: &[f64], y: f64, weight: f64, cfg: &HoeffdingTreeConfig) {
        if cfg.leaf_prediction == LeafPrediction::Adaptive {
            self.mean_abs_error += weight * (y - self.stats.mean).abs();
            self.model_abs_error += weight * (y - self.perceptron.predict(x)).abs();
        }
        if cfg.leaf_prediction != LeafPrediction::Mean {
            self.perceptron.learn(x, y, weight, cfg);
        }
        self.stats.update(y, weight);
        self.search.observe(x, y, weight);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SplitNode {
    attribute: usize,
    threshold: f64,
    children: [Node; 2],
    depth: usize,
    monitor: Option<ErrorMonitor>,
    alternate: Option<Box<Node>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(Box<Leaf>),
    Split(Box<SplitNode>),
}

impl Node {
    fn predict(&self, x: &[f64], mode: LeafPrediction) -> f64 {
        let mut node = self;
        loop {
            match node {
                Node::Leaf(leaf) => return leaf.predict(x, mode),
                Node::Split(s) => node = &s.children[s.branch(x)],
            }
        }
    }

    fn monitor(&self) -> Option<&ErrorMonitor> {
        match self {
            Node::Leaf(l) => l.monitor.as_ref(),
            Node::Split(s) => s.monitor.as_ref(),
        }
    }

    fn count_leaves(&self) -> usize {
        match self {
            Node::Leaf(_) => 1,
            Node::Split(s) => s.children.iter().map(Node::count_leaves).sum(),
        }
    }

    fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Split(s) => 1 + s.children.iter().map(Node::depth).max().unwrap_or(0),
        }
    }
}

impl SplitNode {
    fn branch(&self, x: &[f64]) -> usize {
        usize::from(x[self.attribute] > self.threshold)
    }
}

/// Structural change counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeCounters {
    pub splits: u64,
    pub alternates_started: u64,
    pub alternates_swapped: u64,
    pub alternates_pruned: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TreeCore {
    config: HoeffdingTreeConfig,
    adaptive: bool,
    dim: Dimension,
    root: Option<Node>,
    rng: ChaCha8Rng,
    error_norm: RunningStats,
    counters: TreeCounters,
    weight_seen: f64,
}

/// Borrowed state shared by the recursive learning pass.
struct Pass<'a> {
    config: &'a HoeffdingTreeConfig,
    adaptive: bool,
    dim: usize,
    rng: &'a mut ChaCha8Rng,
    norm: RunningStats,
    counters: &'a mut TreeCounters,
}

impl Pass<'_> {
    fn new_leaf(&mut self, depth: usize, stats: RunningStats, perceptron: Perceptron) -> Node {
        let attributes = match self.config.max_features {
            Some(m) if m < self.dim => {
                let mut picked = sample(&mut *self.rng, self.dim, m.max(1)).into_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..self.dim).collect(),
        };
        Node::Leaf(Box::new(Leaf {
            stats,
            weight_at_last_attempt: stats.n,
            search: SplitSearch::new(attributes, self.config.max_bins),
            perceptron,
            mean_abs_error: 0.0,
            model_abs_error: 0.0,
            depth,
            monitor: self.adaptive.then(ErrorMonitor::new),
        }))
    }

    fn fresh_leaf(&mut self, depth: usize) -> Node {
        let p = Perceptron::new(self.dim);
        self.new_leaf(depth, RunningStats::default(), p)
    }

    /// Feeds one example to the subtree at `node`. A returned node must
    /// replace `node` in its parent.
    fn learn(&mut self, node: &mut Node, x: &[f64], y: f64, weight: f64) -> Option<Node> {
        let mode = self.config.leaf_prediction;
        let error = self
            .adaptive
            .then(|| normalized_error((y - node.predict(x, mode)).abs(), &self.norm));

        match node {
            Node::Leaf(leaf) => {
                if let (Some(m), Some(e)) = (leaf.monitor.as_mut(), error) {
                    m.adwin.update(e).expect("normalized error is finite");
                }
                leaf.learn(x, y, weight, self.config);
                if leaf.stats.n - leaf.weight_at_last_attempt >= self.config.grace_period {
                    leaf.weight_at_last_attempt = leaf.stats.n;
                    return self.attempt_split(leaf);
                }
                None
            }
            Node::Split(split) => {
                let mut replacement = None;
                if let (Some(m), Some(e)) = (split.monitor.as_mut(), error) {
                    let before = m.estimation();
                    let drift = m.adwin.update(e).expect("normalized error is finite").drift;
                    if drift && m.estimation() > before {
                        split.alternate = Some(Box::new(self.fresh_leaf(split.depth)));
                        self.counters.alternates_started += 1;
                    } else if let Some(alt) = split.alternate.as_ref() {
                        match judge_alternate(m, alt.monitor()) {
                            Verdict::Swap => {
                                self.counters.alternates_swapped += 1;
                                replacement = split.alternate.take().map(|b| *b);
                            }
                            Verdict::Prune => {
                                self.counters.alternates_pruned += 1;
                                split.alternate = None;
                            }
                            Verdict::Wait => {}
                        }
                    }
                }
                if let Some(mut new_node) = replacement {
                    if let Some(inner) = self.learn(&mut new_node, x, y, weight) {
                        new_node = inner;
                    }
                    return Some(new_node);
                }
                if let Some(alt) = split.alternate.as_mut() {
                    if let Some(inner) = self.learn(alt, x, y, weight) {
                        **alt = inner;
                    }
                }
                let branch = split.branch(x);
                if let Some(inner) = self.learn(&mut split.children[branch], x, y, weight) {
                    split.children[branch] = inner;
                }
                None
            }
        }
    }

    fn attempt_split(&mut self, leaf: &mut Leaf) -> Option<Node> {
        if self.config.max_depth.is_some_and(|d| leaf.depth >= d) {
            return None;
        }
        let suggestions = leaf.search.suggestions();
        let best = suggestions.first()?;
        let second_merit = suggestions.get(1).map_or(0.0, |s| s.merit);
        if !should_split(best, second_merit, leaf.stats.n, self.config) {
            return None;
        }
        self.counters.splits += 1;
        let depth = leaf.depth + 1;
        let children = [
            self.new_leaf(depth, best.left, leaf.perceptron.clone()),
            self.new_leaf(depth, best.right, leaf.perceptron.clone()),
        ];
        Some(Node::Split(Box::new(SplitNode {
            attribute: best.attribute,
            threshold: best.threshold,
            children,
            depth: leaf.depth,
            monitor: leaf.monitor.take(),
            alternate: None,
        })))
    }
}

fn should_split(
    best: &SplitSuggestion,
    second_merit: f64,
    n: f64,
    cfg: &HoeffdingTreeConfig,
) -> bool {
    if best.merit <= 0.0 {
        return false;
    }
    let eps = hoeffding_bound(1.0, cfg.split_confidence, n);
    best.merit - second_merit > eps || eps < cfg.tie_threshold
}

enum Verdict {
    Swap,
    Prune,
    Wait,
}

fn judge_alternate(main: &ErrorMonitor, alt: Option<&ErrorMonitor>) -> Verdict {
    let Some(alt) = alt else {
        return Verdict::Wait;
    };
    if main.width() <= ALTERNATE_MIN_WIDTH || alt.width() <= ALTERNATE_MIN_WIDTH {
        return Verdict::Wait;
    }
    let old = main.estimation();
    let new = alt.estimation();
    let n_inv = 1.0 / alt.width() as f64 + 1.0 / main.width() as f64;
    let bound = (2.0 * old * (1.0 - old) * (2.0 / ALTERNATE_DELTA).ln() * n_inv).sqrt();
    if bound < old - new {
        Verdict::Swap
    } else if bound < new - old {
        Verdict::Prune
    } else {
        Verdict::Wait
    }
}

impl TreeCore {
    fn new(config: HoeffdingTreeConfig, adaptive: bool) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(config.seed);
        Self {
            config,
            adaptive,
            dim: Dimension::default(),
            root: None,
            rng,
            error_norm: RunningStats::default(),
            counters: TreeCounters::default(),
            weight_seen: 0.0,
        }
    }

    fn validate(config: &HoeffdingTreeConfig) -> Result<(), ModelError> {
        let bad = |msg: &str| Err(ModelError::Config(msg.to_string()));
        if !(config.grace_period > 0.0) {
            return bad("grace_period must be positive");
        }
        if !(config.split_confidence > 0.0 && config.split_confidence < 1.0) {
            return bad("split_confidence must be in (0, 1)");
        }
        if config.max_bins < 2 {
            return bad("max_bins must be at least 2");
        }
        if config.max_features == Some(0) {
            return bad("max_features must be at least 1");
        }
        Ok(())
    }

    fn learn(&mut self, x: &[f64], y: f64, weight: f64) -> Result<(), ModelError> {
        let dim = self.dim.bind(x.len())?;
        check_finite(x, y)?;
        if weight <= 0.0 {
            return Ok(());
        }
        let norm = if self.adaptive {
            let abs_error = (y - self.predict_unchecked(x)).abs();
            self.error_norm.update(abs_error, 1.0);
            self.error_norm
        } else {
            RunningStats::default()
        };
        let mut pass = Pass {
            config: &self.config,
            adaptive: self.adaptive,
            dim,
            rng: &mut self.rng,
            norm,
            counters: &mut self.counters,
        };
        let mut root = match self.root.take() {
            Some(r) => r,
            None => pass.fresh_leaf(0),
        };
        if let Some(new_root) = pass.learn(&mut root, x, y, weight) {
            root = new_root;
        }
        self.root = Some(root);
        self.weight_seen += weight;
        Ok(())
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.root
            .as_ref()
            .map_or(0.0, |r| r.predict(x, self.config.leaf_prediction))
    }

    fn predict(&self, x: &[f64]) -> Result<f64, ModelError> {
        self.dim.check(x.len())?;
        Ok(self.predict_unchecked(x))
    }

    fn root_split(&self) -> Option<(usize, f64)> {
        match self.root.as_ref()? {
            Node::Split(s) => Some((s.attribute, s.threshold)),
            Node::Leaf(_) => None,
        }
    }
}

macro_rules! tree_accessors {
    () => {
        pub fn config(&self) -> &HoeffdingTreeConfig {
            &self.core.config
        }

        pub fn counters(&self) -> TreeCounters {
            self.core.counters
        }

        pub fn n_leaves(&self) -> usize {
            self.core.root.as_ref().map_or(1, Node::count_leaves)
        }

        pub fn depth(&self) -> usize {
            self.core.root.as_ref().map_or(0, Node::depth)
        }

        pub fn weight_seen(&self) -> f64 {
            self.core.weight_seen
        }

        /// Attribute and threshold of the root split, if the root has split.
        pub fn root_split(&self) -> Option<(usize, f64)> {
            self.core.root_split()
        }

        /// Learns one example with an integer or fractional weight.
        pub fn learn_weighted(
            &mut self,
            features: &[f64],
            target: f64,
            weight: f64,
        ) -> Result<(), ModelError> {
            self.core.learn(features, target, weight)
        }

        /// Prediction for `features`; 0.0 before the first example.
        pub fn predict(&self, features: &[f64]) -> Result<f64, ModelError> {
            self.core.predict(features)
        }
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingTreeRegressor {
    core: TreeCore,
}

impl HoeffdingTreeRegressor {
    pub fn new(config: HoeffdingTreeConfig) -> Result<Self, ModelError> {
        TreeCore::validate(&config)?;
        Ok(Self {
            core: TreeCore::new(config, false),
        })
    }

    tree_accessors!();
}

impl Default for HoeffdingTreeRegressor {
    fn default() -> Self {
        Self::new(HoeffdingTreeConfig::default()).expect("defaults are valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingAdaptiveTreeRegressor {
    core: TreeCore,
}

impl HoeffdingAdaptiveTreeRegressor {
    pub fn new(config: HoeffdingTreeConfig) -> Result<Self, ModelError> {
        TreeCore::validate(&config)?;
        Ok(Self {
            core: TreeCore::new(config, true),
        })
    }

    tree_accessors!();
}

impl Default for HoeffdingAdaptiveTreeRegressor {
    fn default() -> Self {
        Self::new(HoeffdingTreeConfig::default()).expect("defaults are valid")
    }
}

macro_rules! impl_tree_regressor {
    ($ty:ident, $variant:ident) => {
        impl Regressor for $ty {
            fn fit(&mut self, rows: &[&[f64]], targets: &[f64]) -> Result<(), ModelError> {
                learn_all(self, rows, targets)
            }

            fn predict_one(&self, features: &[f64]) -> Result<f64, ModelError> {
                self.predict(features)
            }

            fn learn_one(&mut self, features: &[f64], target: f64) -> Result<(), ModelError> {
                self.learn_weighted(features, target, 1.0)
            }

            fn is_incremental(&self) -> bool {
                true
            }

            fn snapshot(&self) -> Option<ModelSnapshot> {
                Some(ModelSnapshot::$variant(self.clone()))
            }
        }
    };
}

impl_tree_regressor!(HoeffdingTreeRegressor, HoeffdingTree);
impl_tree_regressor!(HoeffdingAdaptiveTreeRegressor, HoeffdingAdaptiveTree);
