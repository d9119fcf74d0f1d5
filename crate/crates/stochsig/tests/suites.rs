use stochsig::brownian::{generate_whk, Interval};
use stochsig::experiments::{run, ExperimentConfig, Row, Suite};
use stochsig::rng::SeedSpec;
use stochsig::stats::variance_se;

fn small() -> ExperimentConfig {
    ExperimentConfig::parse("paths = 2000\noracle_paths = 200\noracle_steps = 64\n").unwrap()
}

#[test]
fn misscaled_space_time_area_fails_its_row() {
    let iv = Interval::of_length(1.0).unwrap();
    let mut s = SeedSpec::new(9).stream();
    let hh: Vec<f64> = (0..1_000_000).map(|_| 1.01 * generate_whk(iv, 1, &mut s).unwrap().h_area[0]).collect();
    let v = variance_se(&hh);
    assert!(!Row::new("moments/var_h", "whk", v.n, v.mean, v.se).check_se(1.0 / 12.0, 5.0).pass());
}

#[test]
fn shuffle_suite_passes_and_is_exact() {
    let rows = run(Suite::ShuffleCheck, &small()).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(Row::pass));
    assert_eq!(rows[0].estimate, 0.0);
}

#[test]
fn suites_do_not_depend_on_thread_count() {
    let cfg = small();
    let go = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run(Suite::Moments, &cfg).unwrap())
    };
    let strip = |rows: Vec<Row>| rows.into_iter().map(|r| Row { runtime_s: 0.0, ..r }).collect::<Vec<_>>();
    assert_eq!(strip(go(1)), strip(go(3)));
}

#[test]
fn seed_changes_the_estimates() {
    let a = run(Suite::Moments, &small()).unwrap();
    let mut cfg = small();
    cfg.seed = 1;
    let b = run(Suite::Moments, &cfg).unwrap();
    assert_ne!(a[0].estimate, b[0].estimate);
}

#[test]
fn config_for_another_experiment_is_refused() {
    let cfg = ExperimentConfig::parse("experiment = ratio\n").unwrap();
    assert!(run(Suite::Moments, &cfg).is_err());
}

#[test]
fn every_suite_runs_at_small_size() {
    let mut cfg = small();
    cfg.paths = Some(200);
    cfg.fhn_paths = 200;
    cfg.igbm_weak_paths = 200;
    cfg.mlmc_levels = 3;
    for s in Suite::all() {
        let rows = run(s, &cfg).unwrap_or_else(|e| panic!("{s}: {e}"));
        assert!(!rows.is_empty(), "{s}");
        for r in &rows {
            assert!(r.experiment.starts_with(s.name()), "{} in {s}", r.experiment);
            assert!(r.runtime_s >= 0.0);
        }
    }
}
