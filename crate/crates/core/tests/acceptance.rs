//! Acceptance checks, one PASS/FAIL line each. Every check runs even when
//! an earlier one fails; the process exits non-zero if any failed.
//!
//! Checks 9 and 10 and the timing check 12 read the real ECDC daily file
//! from `EPISTREAM_ECDC_CSV` or `data/ecdc_daily.csv`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{check_cart_against_brute_force, ramp, real_data_path, FrozenStub};
use epistream::batch::{fit_cart, fit_forest, fit_gbrt, fit_linear, CartParams, ForestParams, GbrtParams};
use epistream::evaluate::{compute_metrics, mann_whitney_u, run_holdout, run_prequential, welch_t, ScoreWindow};
use epistream::experiment::{
    compare_modes, run_experiment_1, run_experiment_2, run_experiment_3, Dataset, DefaultFactory, Mode,
    RunConfig, Scheme, ALL, MEAN, ONLINE_ALGORITHMS,
};
use epistream::ingest::CaseSeries;
use epistream::online::{
    Adwin, AdaptiveRandomForestRegressor, ArfConfig, HoeffdingTreeConfig, HoeffdingTreeRegressor,
    LeafPrediction, MaxFeatures, PaConfig, PaVariant, PassiveAggressiveRegressor,
};
use epistream::windowing::{make_examples, WindowParams};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn real_config() -> Result<RunConfig, String> {
    let path = real_data_path().ok_or_else(|| {
        "real ECDC daily file not found (set EPISTREAM_ECDC_CSV or place data/ecdc_daily.csv)".to_string()
    })?;
    let mut config = RunConfig::default();
    config.data.path = path;
    Ok(config)
}

fn windowing() -> Outcome {
    let start = Instant::now();
    let params = WindowParams::default();
    let series = ramp("X", common::d(2020, 1, 1), 200);
    let ex = make_examples(&series, params);
    if ex.len() != 112 {
        return Err(format!("200 days gave {} examples", ex.len()));
    }
    // day k holds value k: inputs are days 1..=50, target averages days 80..=89
    let hand_features: Vec<f64> = (1..=50).map(f64::from).collect();
    let hand_target = (80..=89).map(f64::from).sum::<f64>() / 10.0;
    if ex[0].features != hand_features || ex[0].target != hand_target {
        return Err("first example differs from the hand construction".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=500usize {
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(0..1000) as f64).collect();
        let s = CaseSeries::new("X", common::d(2020, 1, 1), values.clone());
        let got = make_examples(&s, params);
        let mut expected = Vec::new();
        for first in 0..n {
            let last = first + 49;
            let t0 = last + 30;
            if t0 + 9 >= n {
                break;
            }
            let mut sum = 0.0;
            for v in &values[t0..t0 + 10] {
                sum += v;
            }
            expected.push((values[first..=last].to_vec(), sum / 10.0));
        }
        if got.len() != expected.len() {
            return Err(format!("N={n}: {} examples, enumeration gives {}", got.len(), expected.len()));
        }
        for (g, (f, t)) in got.iter().zip(&expected) {
            if &g.features != f || g.target != *t {
                return Err(format!("N={n}: example mismatch"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 1.0, format!("112 examples, hand example matches, N in [1,500] agree, {secs:.3}s"))
}

fn metrics() -> Outcome {
    let r = compute_metrics(&[(100.0, 110.0), (200.0, 180.0), (400.0, 440.0)]);
    let mape = r.mape.ok_or("MAPE undefined")?;
    if (r.mae - 70.0 / 3.0).abs() > 1e-9 || (mape - 10.0).abs() > 1e-9 || (r.rmse - 700f64.sqrt()).abs() > 1e-9 {
        return Err(format!("MAE {} MAPE {} RMSE {}", r.mae, mape, r.rmse));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10_000 {
        let n = rng.random_range(1..=50);
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(-1e3..1e3), rng.random_range(-1e3..1e3)))
            .collect();
        let r = compute_metrics(&pairs);
        if r.rmse < r.mae {
            return Err(format!("RMSE {} < MAE {}", r.rmse, r.mae));
        }
    }
    Ok("hand triple to 1e-9, RMSE >= MAE on 10^4 random sets".into())
}

fn bernoulli(rng: &mut ChaCha8Rng, p: f64) -> f64 {
    if rng.random::<f64>() < p {
        1.0
    } else {
        0.0
    }
}

fn adwin() -> Outcome {
    let mut delays = Vec::new();
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Adwin::new(0.002);
        let mut delay = usize::MAX;
        for t in 0..3000usize {
            let x = bernoulli(&mut rng, if t < 1000 { 0.2 } else { 0.8 });
            if a.update(x).unwrap().drift && t >= 1000 {
                delay = t - 1000;
                break;
            }
        }
        delays.push(delay);
    }
    delays.sort_unstable();
    let median = (delays[49] as f64 + delays[50] as f64) / 2.0;

    let mut worst = 0;
    for p in [0.2, 0.5] {
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let mut a = Adwin::new(0.002);
            let mut alarms = 0;
            for _ in 0..10_000 {
                if a.update(bernoulli(&mut rng, p)).unwrap().drift {
                    alarms += 1;
                }
            }
            worst = worst.max(alarms);
        }
    }
    ensure(
        median <= 150.0 && worst <= 2,
        format!("median delay {median} (<= 150), max false alarms per stationary stream {worst} (<= 2)"),
    )
}

fn hoeffding_split() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let config = HoeffdingTreeConfig {
        grace_period: 20.0,
        // any positive merit splits, so the leaf's choice is observable
        tie_threshold: 1.0,
        leaf_prediction: LeafPrediction::Mean,
        max_bins: 64,
        ..HoeffdingTreeConfig::default()
    };
    for case in 0..100 {
        let rows: Vec<Vec<f64>> = (0..20).map(|_| (0..5).map(|_| rng.random::<f64>()).collect()).collect();
        let targets: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..100.0)).collect();
        let mut tree = HoeffdingTreeRegressor::new(config.clone()).unwrap();
        for (x, &y) in rows.iter().zip(&targets) {
            tree.learn_weighted(x, y, 1.0).unwrap();
        }
        let oracle = common::brute_force_split_with(&rows, &targets, &(0..20).collect::<Vec<_>>(), |lo, hi| {
            (lo + hi) / 2.0
        });
        if tree.root_split() != oracle {
            return Err(format!("case {case}: tree {:?}, oracle {oracle:?}", tree.root_split()));
        }
    }
    Ok("100/100 leaves match the exhaustive argmax".into())
}

fn pa_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    let mut nonzero = 0;
    for _ in 0..1000 {
        let mut m = PassiveAggressiveRegressor::new(PaConfig {
            variant: PaVariant::Pa,
            epsilon: rng.random_range(0.0..1.0),
            ..PaConfig::default()
        })
        .unwrap();
        for _ in 0..rng.random_range(0..5) {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
            m.update(&x, rng.random_range(-50.0..50.0)).unwrap();
        }
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
        let y = rng.random_range(-50.0..50.0);
        m.update(&x, y).unwrap();
        let loss = m.loss(&x, y).unwrap();
        if loss != 0.0 {
            nonzero += 1;
        }
        worst = worst.max(loss);
    }

    let mut capped = 0;
    for _ in 0..1000 {
        let c = rng.random_range(0.01..1.0);
        let mut m = PassiveAggressiveRegressor::new(PaConfig {
            variant: PaVariant::PaI,
            c,
            epsilon: 0.1,
            fit_intercept: false,
        })
        .unwrap();
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm: f64 = x.iter().map(|v| v * v).sum();
        // loss / ‖x‖² is far above C
        let y = 10.0 * c * norm + 1e3;
        let step = m.update(&x, y).unwrap();
        if step.tau == Some(c) {
            capped += 1;
        }
    }
    ensure(
        nonzero == 0 && capped == 1000,
        format!("post-update loss exactly 0 in {}/1000 (max {worst:e}), PA-I step == C in {capped}/1000", 1000 - nonzero),
    )
}

fn arf_degeneracy() -> Outcome {
    let tree_cfg = HoeffdingTreeConfig {
        grace_period: 50.0,
        ..HoeffdingTreeConfig::default()
    };
    let mut arf = AdaptiveRandomForestRegressor::new(ArfConfig {
        ensemble_size: 1,
        poisson_lambda: None,
        max_features: MaxFeatures::All,
        warning_delta: None,
        drift_delta: None,
        tree: tree_cfg.clone(),
        seed: 9,
    })
    .unwrap();
    let mut ht = HoeffdingTreeRegressor::new(tree_cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for t in 0..2000 {
        let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..10.0)).collect();
        let y = if x[0] > 5.0 { 3.0 * x[1] } else { -x[2] } + rng.random_range(-1.0..1.0);
        let (pa, ph) = (arf.predict(&x).unwrap(), ht.predict(&x).unwrap());
        if pa.to_bits() != ph.to_bits() {
            return Err(format!("example {t}: forest {pa}, tree {ph}"));
        }
        arf.learn(&x, y).unwrap();
        ht.learn_weighted(&x, y, 1.0).unwrap();
    }
    ensure(
        ht.counters().splits > 0,
        format!("2000/2000 predictions bit-identical, {} splits", ht.counters().splits),
    )
}

fn batch_learners() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rows: Vec<Vec<f64>> = (0..200).map(|_| (0..3).map(|_| rng.random_range(-10.0..10.0)).collect()).collect();
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let targets: Vec<f64> = rows.iter().map(|x| 3.0 * x[0] - 2.0 * x[1] + 0.5 * x[2] + 5.0).collect();
    let ols = fit_linear(&refs, &targets, 0.0).map_err(|e| e.to_string())?;
    let truth = [3.0, -2.0, 0.5];
    let coef_err = ols
        .weights
        .iter()
        .zip(truth)
        .map(|(w, t)| (w - t).abs())
        .fold((ols.bias - 5.0).abs(), f64::max);
    if coef_err > 1e-6 {
        return Err(format!("OLS coefficient error {coef_err:e}"));
    }

    let mut splits = 0;
    for case in 0..100 {
        let rows: Vec<Vec<f64>> = (0..20).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let targets: Vec<f64> = (0..20).map(|_| rng.random_range(0.0..10.0)).collect();
        let tree = fit_cart(&refs, &targets, CartParams::default()).map_err(|e| e.to_string())?;
        splits += check_cart_against_brute_force(&tree, &rows, &targets).map_err(|e| format!("CART case {case}: {e}"))?;
    }

    for case in 0..20 {
        let rows: Vec<Vec<f64>> = (0..80).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let targets: Vec<f64> = rows
            .iter()
            .map(|x| x[0].sin() * 4.0 + x[1] * x[2] + rng.random_range(-0.5..0.5))
            .collect();
        let g = fit_gbrt(&refs, &targets, GbrtParams::default()).map_err(|e| e.to_string())?;
        if let Some(k) = g.train_mse.windows(2).position(|w| w[1] > w[0]) {
            return Err(format!("GBRT case {case}: MSE rose at stage {}", k + 1));
        }
    }

    let params = ForestParams {
        n_trees: 25,
        seed: 11,
        ..ForestParams::default()
    };
    let f1 = fit_forest(&refs, &targets, params).map_err(|e| e.to_string())?;
    let f2 = fit_forest(&refs, &targets, params).map_err(|e| e.to_string())?;
    ensure(
        f1 == f2,
        format!("OLS error {coef_err:.1e}, CART {splits} splits match brute force, GBRT MSE monotone on 20 sets, forest reproducible"),
    )
}

fn scheme_equivalence() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = common::synthetic_config(dir.path(), 4);
    let data = Dataset::load(&config).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for &m in data.milestones() {
        let split = data.merged_split(m);
        if split.train.is_empty() || split.test.is_empty() {
            continue;
        }
        let h = run_holdout(&mut FrozenStub, &split.train, &split.test).map_err(|e| e.to_string())?;
        let window = ScoreWindow::after_milestone(m, config.milestones.test_span_days);
        let p = run_prequential(&mut FrozenStub, &split.train, &split.test, window).map_err(|e| e.to_string())?;
        let same = h.mape == p.mape
            && h.mae == p.mae
            && h.rmse == p.rmse
            && h.n_scored == p.n_scored
            && h.n_skipped_zero_target == p.n_skipped_zero_target;
        if !same {
            return Err(format!("milestone {m}: hold-out {h:?} vs prequential {p:?}"));
        }
        checked += 1;
    }
    ensure(checked > 0, format!("identical metrics at {checked} milestones (tolerance 0)"))
}

fn prequential_beats_holdout() -> Outcome {
    let config = real_config()?;
    let start = Instant::now();
    let data = Dataset::load(&config).map_err(|e| e.to_string())?;
    let factory = DefaultFactory::new(config.algorithms.clone());
    let out = run_experiment_3(&config, &data, &factory).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let mut lines = Vec::new();
    let mut ok = secs < 1800.0;
    for a in ONLINE_ALGORITHMS {
        let mape = |scheme| {
            out.table
                .grand_mean(a, Mode::MultiCountry, scheme)
                .and_then(|r| r.mape)
                .ok_or_else(|| format!("{a}: no {scheme:?} grand mean"))
        };
        let (h, p) = (mape(Scheme::Holdout)?, mape(Scheme::Prequential)?);
        ok &= p < h;
        if a == "arf" {
            ok &= p / h <= 0.75;
        }
        lines.push(format!("{a} {p:.2}/{h:.2}"));
    }
    ensure(ok, format!("prequential/hold-out MAPE {}; arf ratio must be <= 0.75; {secs:.0}s", lines.join(", ")))
}

fn sc_beats_mc() -> Outcome {
    let mut config = real_config()?;
    config.run.algorithms = Some(vec!["forest".into(), "gbrt".into()]);
    let data = Dataset::load(&config).map_err(|e| e.to_string())?;
    let factory = DefaultFactory::new(config.algorithms.clone());
    let sc = run_experiment_1(&config, &data, &factory).map_err(|e| e.to_string())?;
    let mc = run_experiment_2(&config, &data, &factory).map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut lines = Vec::new();
    for row in compare_modes(&sc.table, &mc.table) {
        let (s, m) = (row.sc_median_mape.unwrap_or(f64::NAN), row.mc_median_mape.unwrap_or(f64::NAN));
        ok &= s < m;
        lines.push(format!("{} SC {s:.2} vs MC {m:.2}", row.algorithm));
    }
    ensure(ok && lines.len() == 2, format!("median per-country MAPE: {}", lines.join(", ")))
}

fn statistics() -> Outcome {
    let mw = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).map_err(|e| e.to_string())?;
    let a = [2.0, 4.5, 3.1, 8.2, 5.0];
    let w = welch_t(&a, &a).map_err(|e| e.to_string())?;
    ensure(
        mw.statistic == 0.0 && (mw.p_value - 0.1).abs() <= 1e-12 && w.p_value == 1.0 && w.statistic == 0.0,
        format!("U = {}, p = {}; Welch(a, a): t = {}, p = {}", mw.statistic, mw.p_value, w.statistic, w.p_value),
    )
}

fn performance() -> Outcome {
    let mut config = real_config()?;
    config.run.record_timing = true;
    let start = Instant::now();
    let data = Dataset::load(&config).map_err(|e| e.to_string())?;
    let factory = DefaultFactory::new(config.algorithms.clone());
    let out = run_experiment_1(&config, &data, &factory).map_err(|e| e.to_string())?;
    let total = start.elapsed().as_secs_f64();
    let slowest = out
        .table
        .rows
        .iter()
        .filter(|r| r.country != ALL && r.milestone != MEAN && ONLINE_ALGORITHMS.contains(&r.algorithm.as_str()))
        .map(|r| (r.seconds, r.algorithm.clone()))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or("no online leaf rows")?;
    ensure(
        slowest.0 < 5.0 && total < 1200.0,
        format!(
            "slowest online unit {:.3}s ({}), full exp1 over {} countries {total:.0}s",
            slowest.0,
            slowest.1,
            data.countries.len()
        ),
    )
}

type Check = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let checks: [Check; 12] = [
        ("windowing oracle", windowing),
        ("metrics", metrics),
        ("ADWIN delay and false alarms", adwin),
        ("Hoeffding split correctness", hoeffding_split),
        ("PA closed form", pa_closed_form),
        ("ARF degeneracy", arf_degeneracy),
        ("batch learners", batch_learners),
        ("scheme equivalence", scheme_equivalence),
        ("prequential vs hold-out on real data", prequential_beats_holdout),
        ("single- vs multi-country ensembles on real data", sc_beats_mc),
        ("statistics", statistics),
        ("performance", performance),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
