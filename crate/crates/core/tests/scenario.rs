use twinbeam::scenario::{
    compute_states, log_ladder, run_scenario, sweep_filters, write_outputs, GainKind, OutputKind, PropagatorCache,
    RunOptions, ScenarioConfig, Source,
};
use twinbeam::Error;

fn small(geometry: &str, extra: &str) -> ScenarioConfig {
    let text = format!(
        r#"{{
            "name": "t",
            "geometry": "{geometry}",
            "grid": {{"half_width": 6.0, "points": 41}},
            "medium": {{"kappa": 3.0, "n_domains": 40}},
            "gain": {{"mean_signal_photons": [0.0003, 0.5, 3.0]}}
            {extra}
        }}"#
    );
    ScenarioConfig::from_json(&text).unwrap()
}

#[test]
fn config_defaults_and_ladder() {
    let cfg = ScenarioConfig::from_json(r#"{"geometry": "apodized_double", "medium": {"kappa": 4.1}}"#).unwrap();
    assert_eq!(cfg.grid.points, 501);
    assert_eq!(cfg.medium.n_domains, 1000);
    assert_eq!(cfg.reference_gain, 3e-4);
    let (kind, g) = cfg.gain_values(None);
    assert_eq!(kind, GainKind::SignalPhotons);
    assert_eq!(g.len(), 20);
    assert!((g[0] - 3e-4).abs() < 1e-18 && g[19] == 10.6);
    assert!(g.windows(2).all(|w| w[1] > w[0]));
    let ratio = g[1] / g[0];
    assert!(g.windows(2).all(|w| (w[1] / w[0] - ratio).abs() < 1e-9));
    assert_eq!(cfg.gain_values(Some(5)).1, log_ladder(3e-4, 10.6, 5));
    assert!(log_ladder(1.0, 2.0, 0).is_empty());
}

#[test]
fn config_errors_name_the_field() {
    let bad = [
        (
            r#"{"geometry": "apodized_single", "medium": {"kappa": 0.0}}"#,
            "medium.kappa",
        ),
        (
            r#"{"geometry": "apodized_single", "medium": {"kappa": 1.0}, "grid": {"points": 1}}"#,
            "grid.points",
        ),
        (
            r#"{"geometry": "apodized_single", "medium": {"kappa": 1.0}, "gain": {"pump_photons": [-1.0]}}"#,
            "gain",
        ),
        (
            r#"{"geometry": "unapodized_single", "medium": {"kappa": 1.0}, "filter_widths": [1.0]}"#,
            "filter_widths",
        ),
        (
            r#"{"geometry": "unapodized_single", "medium": {"kappa": 1.0}, "outputs": ["fidelity_matrix"]}"#,
            "outputs",
        ),
        (
            r#"{"geometry": "unapodized_single", "medium": {"kappa": 1.0}, "name": "a b"}"#,
            "name",
        ),
        (r#"{"geometry": "triple", "medium": {"kappa": 1.0}}"#, "config"),
        (
            r#"{"geometry": "unapodized_single", "medium": {"kappa": 1.0}, "typo": 1}"#,
            "config",
        ),
    ];
    for (text, field) in bad {
        match ScenarioConfig::from_json(text) {
            Err(Error::Config { field: f, .. }) => assert_eq!(f, field, "{text}"),
            other => panic!("{text}: {other:?}"),
        }
    }
}

#[test]
fn output_names_parse() {
    let cfg = ScenarioConfig::from_json(
        r#"{"geometry": "unapodized_single", "medium": {"kappa": 1.0},
            "outputs": ["jsa", "schmidt_modes", "K_vs_gain", "fidelity_vs_gain", "purity_vs_gain", "poling_amplitude"]}"#,
    )
    .unwrap();
    assert_eq!(cfg.outputs.len(), 6);
    assert!(cfg.outputs.contains(&OutputKind::KVsGain));
}

#[test]
fn lab_units_set_the_carrier_frequency() {
    let cfg = ScenarioConfig::from_json(
        r#"{"geometry": "unapodized_single", "medium": {"kappa": 1.0},
            "lab_units": {"pump_wavelength_nm": 776.0, "pump_duration_fs": 200.0}}"#,
    )
    .unwrap();
    let l = cfg.lab_units.as_ref().unwrap();
    // 776 nm carrier: 2.4275 rad/fs; 200 fs intensity FWHM: 8.3255e-3 rad/fs.
    assert!((l.sigma_rad_per_fs() - 8.3255e-3).abs() < 1e-6);
    assert!((cfg.omega_bar_p() - 2.4275 / 8.3255e-3).abs() < 0.1);
}

#[test]
fn empty_gain_list_gives_empty_bundle() {
    let mut cfg = small("unapodized_single", "");
    cfg.gain = twinbeam::scenario::GainConfig::MeanSignalPhotons(vec![]);
    let res = run_scenario(&cfg, &RunOptions::default()).unwrap();
    assert!(res.summary.points.is_empty());
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(write_outputs(&res, dir.path()).unwrap().len(), 1);
}

#[test]
fn summary_matches_direct_recomputation() {
    let cfg = small("unapodized_single", "");
    let res = run_scenario(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(res.summary.points.len(), 3);
    let src = Source::from_config(&cfg).unwrap();
    for p in &res.summary.points {
        assert!((p.mean_signal_photons / p.target - 1.0).abs() < 1e-3);
        let u = src.propagator(p.pump_photons).unwrap();
        let d = twinbeam::schmidt_decompose(&u, &src.grid).unwrap();
        assert!(
            (twinbeam::mean_signal_photons(&d) - p.mean_signal_photons).abs() < 1e-9 * p.mean_signal_photons.max(1.0)
        );
        assert!((twinbeam::schmidt_number(&d).unwrap() - p.schmidt_number).abs() < 1e-9);
    }
    assert!((res.summary.points[0].fidelity - 1.0).abs() < 1e-12);
}

#[test]
fn reruns_are_byte_identical_with_and_without_cache() {
    let cfg = small(
        "unapodized_single",
        r#", "filter": {"kind": "top-hat", "half_width": 1.5},
            "outputs": ["K_vs_gain", "fidelity_vs_gain", "purity_vs_gain", "fidelity_matrix", "jsa", "schmidt_modes", "poling_amplitude"]"#,
    );
    let cache = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<(String, Vec<u8>)>> = [None, Some(cache.path()), Some(cache.path())]
        .into_iter()
        .map(|c| {
            let out = tempfile::tempdir().unwrap();
            let opts = RunOptions {
                cache_dir: c.map(|p| p.to_path_buf()),
                ..Default::default()
            };
            let res = run_scenario(&cfg, &opts).unwrap();
            write_outputs(&res, out.path())
                .unwrap()
                .iter()
                .map(|p| {
                    (
                        p.file_name().unwrap().to_string_lossy().into_owned(),
                        std::fs::read(p).unwrap(),
                    )
                })
                .collect()
        })
        .collect();
    assert_eq!(runs[0].len(), 8);
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[1], runs[2]);
    let src = Source::from_config(&cfg).unwrap();
    let cache = PropagatorCache::new(cache.path()).unwrap();
    assert_eq!(cache.calibrations(&src).len(), 3);
}

#[test]
fn pump_photon_gain_points_are_used_directly() {
    let mut cfg = small("apodized_single", "");
    cfg.medium.kappa = 4.1;
    cfg.gain = twinbeam::scenario::GainConfig::PumpPhotons(vec![0.5, 2.0]);
    let sweep = compute_states(&cfg, &RunOptions::default()).unwrap();
    assert_eq!(sweep.kind, GainKind::PumpPhotons);
    assert_eq!(sweep.states[0].pump_photons, 0.5);
    assert!(sweep.states[1].mean_signal_photons > sweep.states[0].mean_signal_photons);
}

#[test]
fn wide_filter_reduces_to_unfiltered_fidelity() {
    let mut cfg = small("apodized_single", "");
    cfg.medium.kappa = 4.1;
    let res = run_scenario(&cfg, &RunOptions::default()).unwrap();
    let sweep = sweep_filters(&cfg, &[1e6], &RunOptions::default()).unwrap();
    for (p, f) in res.summary.points.iter().zip(&sweep.fidelity[0]) {
        assert!((p.fidelity - f).abs() < 1e-8, "{} vs {f}", p.fidelity);
    }
    assert!(sweep.purity[0].iter().all(|&p| (p - 1.0).abs() < 1e-6));
}

#[test]
fn filter_sweep_needs_apodized_single() {
    let cfg = small("unapodized_single", "");
    assert!(matches!(
        sweep_filters(&cfg, &[1.0], &RunOptions::default()),
        Err(Error::Config { .. })
    ));
}

#[test]
fn double_pass_runs() {
    let mut cfg = small("apodized_double", r#", "outputs": ["poling_amplitude"]"#);
    cfg.medium.kappa = 4.1;
    let res = run_scenario(&cfg, &RunOptions::default()).unwrap();
    assert!(res.summary.poling_max_error.unwrap() < 0.2);
    assert!(res.summary.points.iter().all(|p| p.fidelity > 0.9));
}
