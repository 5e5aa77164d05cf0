//! Pairwise comparison of per-country MAPE distributions.

use serde::{Deserialize, Serialize};

use super::config::{Mode, Scheme};
use super::results::ResultsTable;
use crate::evaluate::{mann_whitney_u, normality_test, welch_t, StatTestResult};

/// Minimum paired countries; the normality test needs eight observations.
pub const MIN_PAIRED: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceOutcome {
    pub algorithm_a: String,
    pub algorithm_b: String,
    pub mode: Mode,
    pub scheme: Scheme,
    /// Countries with a defined MAPE for both algorithms.
    pub n: usize,
    pub normality_a: Option<StatTestResult>,
    pub normality_b: Option<StatTestResult>,
    /// Welch when both samples look normal, Mann-Whitney otherwise.
    pub test: Option<StatTestResult>,
    pub skipped: Option<String>,
}

impl SignificanceOutcome {
    fn skipped(a: &str, b: &str, mode: Mode, scheme: Scheme, n: usize, why: String) -> Self {
        Self {
            algorithm_a: a.to_string(),
            algorithm_b: b.to_string(),
            mode,
            scheme,
            n,
            normality_a: None,
            normality_b: None,
            test: None,
            skipped: Some(why),
        }
    }
}

/// Compares each pair on every (mode, scheme) where both algorithms have
/// per-country results. Samples are the per-country milestone-mean MAPEs
/// (seed means when available) over the countries both algorithms share.
pub fn run_significance(
    table: &ResultsTable,
    pairs: &[(String, String)],
    normality_alpha: f64,
) -> Vec<SignificanceOutcome> {
    let mut settings: Vec<(Mode, Scheme)> = table.groups().into_iter().map(|g| (g.1, g.2)).collect();
    settings.sort();
    settings.dedup();
    let mut out = Vec::new();
    for (mode, scheme) in settings {
        for (a, b) in pairs {
            let ma = table.country_mapes(a, mode, scheme);
            let mb = table.country_mapes(b, mode, scheme);
            if ma.is_empty() && mb.is_empty() {
                continue;
            }
            let common: Vec<&String> = ma.keys().filter(|c| mb.contains_key(*c)).collect();
            let n = common.len();
            if n < MIN_PAIRED {
                out.push(SignificanceOutcome::skipped(
                    a,
                    b,
                    mode,
                    scheme,
                    n,
                    format!("needs at least {MIN_PAIRED} countries with results for both, got {n}"),
                ));
                continue;
            }
            let xa: Vec<f64> = common.iter().map(|c| ma[*c]).collect();
            let xb: Vec<f64> = common.iter().map(|c| mb[*c]).collect();
            let na = normality_test(&xa).expect("sample size checked");
            let nb = normality_test(&xb).expect("sample size checked");
            let normal = |r: &StatTestResult| !r.degenerate && !r.rejected_at(normality_alpha);
            let test = if normal(&na) && normal(&nb) {
                welch_t(&xa, &xb)
            } else {
                mann_whitney_u(&xa, &xb)
            }
            .expect("sample size checked");
            out.push(SignificanceOutcome {
                algorithm_a: a.clone(),
                algorithm_b: b.clone(),
                mode,
                scheme,
                n,
                normality_a: Some(na),
                normality_b: Some(nb),
                test: Some(test),
                skipped: None,
            });
        }
    }
    out
}

/// Flat CSV form of an outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceRow {
    pub algorithm_a: String,
    pub algorithm_b: String,
    pub mode: Mode,
    pub scheme: Scheme,
    pub n: usize,
    pub normality_p_a: Option<f64>,
    pub normality_p_b: Option<f64>,
    pub test: String,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub reject_at_0_01: Option<bool>,
    pub reject_at_0_05: Option<bool>,
    pub reject_at_0_10: Option<bool>,
    pub note: String,
}

impl From<&SignificanceOutcome> for SignificanceRow {
    fn from(o: &SignificanceOutcome) -> Self {
        let t = o.test.as_ref();
        let decision = |alpha: f64| t.map(|t| t.rejected_at(alpha));
        Self {
            algorithm_a: o.algorithm_a.clone(),
            algorithm_b: o.algorithm_b.clone(),
            mode: o.mode,
            scheme: o.scheme,
            n: o.n,
            normality_p_a: o.normality_a.as_ref().map(|r| r.p_value),
            normality_p_b: o.normality_b.as_ref().map(|r| r.p_value),
            test: t.map_or("", |t| t.test.name()).to_string(),
            statistic: t.map(|t| t.statistic).filter(|s| s.is_finite()),
            p_value: t.map(|t| t.p_value),
            reject_at_0_01: decision(0.01),
            reject_at_0_05: decision(0.05),
            reject_at_0_10: decision(0.1),
            note: match (&o.skipped, t) {
                (Some(why), _) => why.clone(),
                (None, Some(t)) if t.degenerate => "all values identical".to_string(),
                (None, Some(t)) => t.method.clone(),
                (None, None) => String::new(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::TestKind;
    use crate::experiment::results::{ResultRow, MEAN};

    fn table(values: &[(&str, Vec<f64>)]) -> ResultsTable {
        let mut rows = Vec::new();
        for (algo, mapes) in values {
            for (i, m) in mapes.iter().enumerate() {
                rows.push(ResultRow {
                    algorithm: algo.to_string(),
                    mode: Mode::SingleCountry,
                    scheme: Scheme::Holdout,
                    country: format!("C{i:02}"),
                    milestone: MEAN.into(),
                    mape: Some(*m),
                    mae: 0.0,
                    rmse: 0.0,
                    seconds: 0.0,
                    n_scored: 1,
                    n_skipped: 0,
                    seed: "1".into(),
                });
            }
        }
        ResultsTable { rows }
    }

    fn pair() -> Vec<(String, String)> {
        vec![("a".into(), "b".into())]
    }

    #[test]
    fn identical_vectors_are_not_rejected() {
        let v: Vec<f64> = (0..50).map(|i| 10.0 + (i as f64 * 0.7).sin()).collect();
        let out = run_significance(&table(&[("a", v.clone()), ("b", v)]), &pair(), 0.05);
        let t = out[0].test.as_ref().unwrap();
        assert_eq!(t.p_value, 1.0);
        assert!(t.decisions.iter().all(|d| !d.1));
    }

    #[test]
    fn disjoint_ranges_are_rejected_at_one_percent() {
        let a: Vec<f64> = (0..50).map(|i| 1.0 + i as f64 / 100.0).collect();
        let b: Vec<f64> = (0..50).map(|i| 10.0 + i as f64 / 100.0).collect();
        let out = run_significance(&table(&[("a", a), ("b", b)]), &pair(), 0.05);
        let t = out[0].test.as_ref().unwrap();
        assert!(t.rejected_at(0.01));
    }

    #[test]
    fn non_normal_samples_route_to_mann_whitney() {
        // heavily skewed samples
        let a: Vec<f64> = (0..50).map(|i| (i as f64 / 5.0).exp()).collect();
        let b: Vec<f64> = (0..50).map(|i| (i as f64 / 6.0).exp()).collect();
        let out = run_significance(&table(&[("a", a), ("b", b)]), &pair(), 0.05);
        assert!(out[0].normality_a.as_ref().unwrap().rejected_at(0.05));
        assert_eq!(out[0].test.as_ref().unwrap().test, TestKind::MannWhitneyU);
    }

    #[test]
    fn normal_looking_samples_route_to_welch() {
        // evenly spread quantiles of a normal distribution
        use statrs::distribution::{ContinuousCDF, Normal};
        let n = Normal::new(0.0, 1.0).unwrap();
        let q: Vec<f64> = (1..=50).map(|i| n.inverse_cdf(i as f64 / 51.0)).collect();
        let b: Vec<f64> = q.iter().map(|v| v * 2.0 + 1.0).collect();
        let out = run_significance(&table(&[("a", q), ("b", b)]), &pair(), 0.05);
        assert_eq!(out[0].test.as_ref().unwrap().test, TestKind::WelchT);
    }

    #[test]
    fn small_samples_are_skipped_with_reason() {
        let out = run_significance(&table(&[("a", vec![1.0, 2.0]), ("b", vec![3.0, 4.0])]), &pair(), 0.05);
        assert!(out[0].test.is_none());
        assert!(out[0].skipped.as_ref().unwrap().contains("got 2"));
    }
}
