//! Two-sample significance tests and an omnibus normality test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// Significance levels every decision is reported at.
pub const ALPHAS: [f64; 3] = [0.01, 0.05, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    Normality,
    WelchT,
    MannWhitneyU,
}

impl TestKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Normality => "normality",
            Self::WelchT => "welch_t",
            Self::MannWhitneyU => "mann_whitney_u",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    pub test: TestKind,
    pub statistic: f64,
    /// Two-sided, in `[0, 1]`.
    pub p_value: f64,
    /// `(α, rejected)` for each of [`ALPHAS`].
    pub decisions: Vec<(f64, bool)>,
    /// Every observation was identical, so the test carries no information.
    pub degenerate: bool,
    /// How the p-value was obtained, e.g. `"exact"` or `"asymptotic"`.
    pub method: String,
}

impl StatTestResult {
    fn new(test: TestKind, statistic: f64, p_value: f64, method: &str) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            test,
            statistic,
            p_value,
            decisions: ALPHAS.iter().map(|&a| (a, p_value < a)).collect(),
            degenerate: false,
            method: method.to_string(),
        }
    }

    fn degenerate(test: TestKind) -> Self {
        Self {
            degenerate: true,
            ..Self::new(test, f64::NAN, 1.0, "degenerate")
        }
    }

    pub fn rejected_at(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("{test} needs at least {need} observations per sample, got {got}")]
    TooSmall {
        test: &'static str,
        need: usize,
        got: usize,
    },
    #[error("sample contains non-finite values")]
    NonFinite,
}

fn check(test: TestKind, need: usize, samples: &[&[f64]]) -> Result<(), StatsError> {
    for s in samples {
        if s.len() < need {
            return Err(StatsError::TooSmall {
                test: test.name(),
                need,
                got: s.len(),
            });
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite);
        }
    }
    Ok(())
}

fn all_identical(samples: &[&[f64]]) -> bool {
    let first = samples[0][0];
    samples.iter().all(|s| s.iter().all(|&v| v == first))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn central_moment(xs: &[f64], m: f64, k: i32) -> f64 {
    xs.iter().map(|v| (v - m).powi(k)).sum::<f64>() / xs.len() as f64
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("valid parameters")
}

/// D'Agostino–Pearson omnibus test: `K² = Z(skewness)² + Z(kurtosis)²`,
/// referred to χ² with 2 degrees of freedom. Needs 8 observations.
pub fn normality_test(sample: &[f64]) -> Result<StatTestResult, StatsError> {
    let kind = TestKind::Normality;
    check(kind, 8, &[sample])?;
    if all_identical(&[sample]) {
        return Ok(StatTestResult::degenerate(kind));
    }
    let n = sample.len() as f64;
    let m = mean(sample);
    let m2 = central_moment(sample, m, 2);
    let m3 = central_moment(sample, m, 3);
    let m4 = central_moment(sample, m, 4);

    // skewness
    let b1 = m3 / m2.powf(1.5);
    let mut y = b1 * ((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0))).sqrt();
    let beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0)
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = -1.0 + (2.0 * (beta2 - 1.0)).sqrt();
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let alpha = (2.0 / (w2 - 1.0)).sqrt();
    if y == 0.0 {
        y = 1.0;
    }
    let z_skew = delta * (y / alpha + ((y / alpha).powi(2) + 1.0).sqrt()).ln();

    // kurtosis
    let b2 = m4 / (m2 * m2);
    let e = 3.0 * (n - 1.0) / (n + 1.0);
    let var_b2 = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0).powi(2) * (n + 3.0) * (n + 5.0));
    let x = (b2 - e) / var_b2.sqrt();
    let sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * (6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0))).sqrt();
    let a = 6.0
        + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + (1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)).sqrt());
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * (2.0 / (a - 4.0)).sqrt();
    let term2 = denom.signum() * ((1.0 - 2.0 / a) / denom.abs()).cbrt();
    let z_kurt = (term1 - term2) / (2.0 / (9.0 * a)).sqrt();

    let k2 = z_skew * z_skew + z_kurt * z_kurt;
    // χ²₂ survival function
    Ok(StatTestResult::new(kind, k2, (-k2 / 2.0).exp(), "k2"))
}

/// Unequal-variance t test with Welch–Satterthwaite degrees of freedom.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<StatTestResult, StatsError> {
    let kind = TestKind::WelchT;
    check(kind, 2, &[a, b])?;
    if all_identical(&[a, b]) {
        return Ok(StatTestResult::degenerate(kind));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let va = a.iter().map(|v| (v - ma).powi(2)).sum::<f64>() / (na - 1.0);
    let vb = b.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / (nb - 1.0);
    let (sa, sb) = (va / na, vb / nb);
    let se = (sa + sb).sqrt();
    if ma == mb {
        return Ok(StatTestResult::new(kind, 0.0, 1.0, "t"));
    }
    if se == 0.0 {
        // two different constants
        let t = if ma > mb { f64::INFINITY } else { f64::NEG_INFINITY };
        return Ok(StatTestResult::new(kind, t, 0.0, "t"));
    }
    let t = (ma - mb) / se;
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    Ok(StatTestResult::new(kind, t, 2.0 * dist.cdf(-t.abs()), "t"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MwMethod {
    /// Exact when both samples have at most 20 observations.
    Auto,
    Exact,
    Asymptotic,
}

/// Largest per-sample size handled exactly under [`MwMethod::Auto`].
pub const MW_EXACT_MAX: usize = 20;

pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<StatTestResult, StatsError> {
    mann_whitney_u_with(a, b, MwMethod::Auto)
}

/// Rank-sum test. The statistic is `U` of the first sample.
///
/// The exact path enumerates every assignment of the pooled mid-ranks to
/// the first sample (by dynamic programming over rank sums), so it stays
/// exact under ties. The asymptotic path uses the tie-corrected normal
/// approximation with a continuity correction.
pub fn mann_whitney_u_with(a: &[f64], b: &[f64], method: MwMethod) -> Result<StatTestResult, StatsError> {
    let kind = TestKind::MannWhitneyU;
    check(kind, 3, &[a, b])?;
    if all_identical(&[a, b]) {
        return Ok(StatTestResult::degenerate(kind));
    }
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, tie_sizes) = mid_ranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let u1 = r1 - (n1 * (n1 + 1)) as f64 / 2.0;

    let exact = match method {
        MwMethod::Exact => true,
        MwMethod::Asymptotic => false,
        MwMethod::Auto => n1 <= MW_EXACT_MAX && n2 <= MW_EXACT_MAX,
    };
    if exact {
        let p = exact_p(&ranks, n1, r1);
        return Ok(StatTestResult::new(kind, u1, p, "exact"));
    }

    let (f1, f2) = (n1 as f64, n2 as f64);
    let n = f1 + f2;
    let mu = f1 * f2 / 2.0;
    let tie_term: f64 = tie_sizes.iter().map(|&t| t * t * t - t).sum::<f64>() / (n * (n - 1.0));
    let sigma = (f1 * f2 / 12.0 * ((n + 1.0) - tie_term)).sqrt();
    let u_big = u1.max(f1 * f2 - u1);
    let z = (u_big - mu - 0.5) / sigma;
    let p = 2.0 * standard_normal().cdf(-z);
    Ok(StatTestResult::new(kind, u1, p, "asymptotic"))
}

/// 1-based mid-ranks and the sizes of tied groups (size > 1).
fn mid_ranks(values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        if j - i > 1 {
            ties.push((j - i) as f64);
        }
        i = j;
    }
    (ranks, ties)
}

/// Two-sided permutation p-value `2 min(P(R ≤ r1), P(R ≥ r1))` of the first
/// sample's rank sum.
fn exact_p(ranks: &[f64], n1: usize, r1: f64) -> f64 {
    // doubled mid-ranks are integers
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    // ways[k][s]: subsets of size k with doubled rank sum s
    let mut ways = vec![vec![0u128; max_sum + 1]; n1 + 1];
    ways[0][0] = 1;
    for &r in &doubled {
        for k in (1..=n1).rev() {
            for s in (r..=max_sum).rev() {
                let add = ways[k - 1][s - r];
                if add != 0 {
                    ways[k][s] += add;
                }
            }
        }
    }
    let target = (r1 * 2.0).round() as usize;
    let counts = &ways[n1];
    let total: u128 = counts.iter().sum();
    let le: u128 = counts[..=target].iter().sum();
    let ge: u128 = counts[target..].iter().sum();
    (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
}
