use qpe_lab::experiment::{
    fit_all, fit_exponential, fit_saturating_exponential, linspace, n_sweep_summary, read_rows_csv,
    rows_to_csv_string, run_sweep, SweepConfig, SweepRow,
};
use qpe_lab::{ChannelKind, Error, SimMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic(k1: f64, k2: f64, k3: f64, noise: f64, seed: u64) -> Vec<SweepRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    linspace(0.0, 0.01, 21)
        .into_iter()
        .map(|p| SweepRow {
            channel: ChannelKind::Depolarizing,
            n: 5,
            theta_actual: 0.03125,
            p,
            theta_bar: 0.5,
            delta_theta: (k1 + k2 * (-k3 * p).exp()) * (1.0 + noise * rng.random_range(-1.0..1.0)),
            mode: SimMode::Exact,
            shots: 0,
            seed: 0,
        })
        .collect()
}

#[test]
fn fit_recovers_noiseless_parameters() {
    let rows = synthetic(0.32, -0.28, 654.0, 0.0, 0);
    let fit = fit_exponential(&rows, (0.0, 0.01)).unwrap();
    assert!(fit.converged);
    for (got, want) in [(fit.k1, 0.32), (fit.k2, -0.28), (fit.k3, 654.0)] {
        assert!(((got - want) / want).abs() < 1e-6, "{got} vs {want}");
    }
}

#[test]
fn fit_tolerates_one_percent_noise() {
    for seed in 0..10 {
        let rows = synthetic(0.32, -0.28, 654.0, 0.01, seed);
        let fit = fit_exponential(&rows, (0.0, 0.01)).unwrap();
        assert!(fit.r_squared >= 0.98, "seed {seed}: {}", fit.r_squared);
    }
}

#[test]
fn fit_rejects_bad_input() {
    let rows = synthetic(0.1, 0.0, 1.0, 0.0, 0);
    assert!(matches!(
        fit_exponential(&rows, (0.0, 0.01)),
        Err(Error::DegenerateSeries)
    ));
    assert!(matches!(
        fit_exponential(&rows[..3], (0.0, 0.01)),
        Err(Error::TooFewPoints { got: 3, .. })
    ));
    let mut mixed = synthetic(0.3, -0.2, 300.0, 0.0, 0);
    mixed[4].n = 6;
    assert!(matches!(
        fit_exponential(&mixed, (0.0, 0.01)),
        Err(Error::MixedSeries)
    ));
    assert!(fit_saturating_exponential(&[0.0, 1.0], &[1.0], (0.0, 1.0)).is_err());
}

#[test]
fn fig2_sweep_cardinality_and_order() {
    let cfg = SweepConfig::fig2();
    let rows = run_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 4 * 3 * 26);
    assert_eq!(cfg.num_points(), rows.len());
    for pair in rows.windows(2) {
        let key = |r: &SweepRow| (r.channel, r.n, r.theta_actual, r.p);
        let (a, b) = (key(&pair[0]), key(&pair[1]));
        assert!(
            (a.0, a.1)
                .cmp(&(b.0, b.1))
                .then(a.2.total_cmp(&b.2))
                .then(a.3.total_cmp(&b.3))
                .is_lt(),
            "rows out of order"
        );
    }
    for r in &rows {
        assert!((0.0..=1.0).contains(&r.theta_bar));
        assert!(r.delta_theta >= 0.0);
    }
    let text = rows_to_csv_string(&rows, &cfg.describe()).unwrap();
    assert_eq!(read_rows_csv(text.as_bytes()).unwrap(), rows);
}

#[test]
fn noiseless_single_point() {
    let cfg = SweepConfig {
        channels: vec![ChannelKind::BitFlip],
        n_list: vec![5],
        theta_list: vec![0.5],
        p_grid: vec![0.0],
        ..SweepConfig::fig2()
    };
    let rows = run_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].theta_bar - 0.5).abs() < 1e-12);
    assert!(rows[0].delta_theta < 1e-6);
}

#[test]
fn strong_depolarizing_approaches_uniform_moments() {
    let cfg = SweepConfig {
        channels: vec![ChannelKind::Depolarizing],
        n_list: vec![5],
        theta_list: vec![0.03125],
        p_grid: vec![0.9],
        ..SweepConfig::fig2()
    };
    let row = &run_sweep(&cfg).unwrap()[0];
    let uniform_std = (1023.0_f64 / 12288.0).sqrt();
    assert!(
        (row.theta_bar - 31.0 / 64.0).abs() < 0.01,
        "{}",
        row.theta_bar
    );
    assert!(
        (row.delta_theta - uniform_std).abs() < 0.01,
        "{}",
        row.delta_theta
    );
}

#[test]
fn sampled_sweep_is_seeded() {
    let cfg = SweepConfig {
        channels: vec![ChannelKind::PhaseFlip],
        n_list: vec![3],
        theta_list: vec![0.25],
        p_grid: vec![0.02, 0.04],
        mode: SimMode::Sampled,
        shots: 1000,
        seed: 9,
        ..SweepConfig::fig2()
    };
    let a = run_sweep(&cfg).unwrap();
    assert_eq!(a, run_sweep(&cfg).unwrap());
    assert!(a.iter().all(|r| r.shots == 1000 && r.seed == 9));
    let b = run_sweep(&SweepConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a, b);
}

#[test]
fn config_validation() {
    let empty = SweepConfig {
        p_grid: vec![],
        ..SweepConfig::fig2()
    };
    assert!(empty.validate().is_err());
    let bad_p = SweepConfig {
        p_grid: vec![1.5],
        ..SweepConfig::fig2()
    };
    assert!(bad_p.validate().is_err());
    let toml = SweepConfig::fit_window().to_toml_string();
    let parsed = SweepConfig::from_toml_str(&toml).unwrap();
    assert_eq!(parsed.p_grid, SweepConfig::fit_window().p_grid);
    match SweepConfig::from_toml_str("channels = [\"bitflip\"]\nn_list = [5]\nbogus = 1\n") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn n_sweep_summary_on_noiseless_rows_is_flat() {
    let cfg = SweepConfig::n_sweep(0.0);
    let rows = run_sweep(&cfg).unwrap();
    let summary = n_sweep_summary(&rows).unwrap();
    assert_eq!(summary.len(), 1);
    assert!(summary[0].delta_theta.slope.abs() < 1e-6);
    assert!(summary[0].theta_bar.slope.abs() < 1e-9);
    assert!(matches!(
        n_sweep_summary(&rows[..1]),
        Err(Error::TooFewQubitCounts(1))
    ));
}

// The fitted model evaluated at p = 0 should reproduce the noiseless spread.
// It does not: Δθ rises like √p near zero, steeper than any saturating
// exponential, so the fit intercept sits 0.016–0.029 above Δθ(0) = 0.
#[test]
#[ignore = "fitted intercepts exceed the 0.02 tolerance for most series; see README"]
fn fit_intercept_matches_noiseless_spread() {
    let rows = run_sweep(&SweepConfig::fit_window()).unwrap();
    for (key, fit) in fit_all(&rows, (0.0, 0.01)) {
        let fit = fit.unwrap();
        let at_zero = rows
            .iter()
            .find(|r| r.series_key() == key && r.p == 0.0)
            .unwrap()
            .delta_theta;
        assert!(fit.k2 < 0.0);
        assert!(
            (fit.k1 + fit.k2 - at_zero).abs() <= 0.02,
            "{} theta={}: k1+k2 = {} vs {at_zero}",
            key.channel,
            key.theta_actual,
            fit.k1 + fit.k2
        );
    }
}
