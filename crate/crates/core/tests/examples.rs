//! Runs every example's entry point.
#![allow(dead_code)]

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }
    };
}

example!(synthetic_data);
example!(ingest_and_windowing);
example!(adwin_drift);
example!(hoeffding_trees);
example!(adaptive_random_forest);
example!(passive_aggressive);
example!(batch_baselines);
example!(prequential_vs_holdout);
example!(significance_tests);
example!(experiments);
example!(snapshots);

#[test]
fn synthetic_data_writes_a_readable_file() {
    let dir = tempfile::tempdir().unwrap();
    let series = synthetic_data::run(&dir.path().join("x/cases.csv"), 5).unwrap();
    assert_eq!(series.len(), 5);
    let back = epistream::ingest::parse_csv(dir.path().join("x/cases.csv")).unwrap();
    assert_eq!(epistream::ingest::build_all_series(&back), series);
}

#[test]
fn ingest_and_windowing_runs() {
    let s = ingest_and_windowing::run(None).unwrap();
    assert_eq!(s.milestones, 8);
    assert!(s.countries >= 1 && s.examples > 0);
}

#[test]
fn adwin_detects_the_jump() {
    let d = adwin_drift::run().unwrap();
    assert!(d.iter().any(|&t| (1500..1700).contains(&t)), "{d:?}");
}

#[test]
fn hoeffding_trees_runs() {
    let blocks = hoeffding_trees::run().unwrap();
    assert_eq!(blocks.len(), 10);
    assert!(blocks[9].1 < blocks[9].0);
}

#[test]
fn adaptive_random_forest_runs() {
    let (mae, replaced) = adaptive_random_forest::run().unwrap();
    assert!(mae < 2.0 && replaced > 0, "{mae} {replaced}");
}

#[test]
fn passive_aggressive_runs() {
    assert_eq!(passive_aggressive::run().unwrap().len(), 3);
}

#[test]
fn batch_baselines_runs() {
    let r = batch_baselines::run().unwrap();
    assert_eq!(r.len(), 6);
    assert!(r.iter().all(|(_, mae)| mae.is_finite()));
}

#[test]
fn prequential_vs_holdout_runs() {
    assert_eq!(prequential_vs_holdout::run().unwrap().len(), 4);
}

#[test]
fn significance_tests_runs() {
    let (w, m) = significance_tests::run().unwrap();
    assert!(w.p_value < 0.05 && (0.0..=1.0).contains(&m.p_value));
}

#[test]
fn experiments_runs_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let all = experiments::run(dir.path(), true).unwrap();
    assert!(dir.path().join("exp3/results.csv").is_file());
    assert!(dir.path().join("modes.csv").is_file());
    assert_eq!(all.modes.len(), 10);
}

#[test]
fn snapshots_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = snapshots::run(&dir.path().join("m.json")).unwrap();
    assert_eq!(a, b);
}
