use trihybrid::baselines::ArchitectureKind;
use trihybrid::harness::{
    aggregate, emit, read_results_json, run_scenario, sweep_nu, sweep_tradeoff, write_results_csv,
    OutputFormat, ScenarioConfig, TriHybridSolver, RESULT_HEADER,
};

fn small(n: usize) -> ScenarioConfig {
    ScenarioConfig {
        n_waveguides: 2,
        elements_per_waveguide: 4,
        n_realizations: n,
        record_wall_time: false,
        ..ScenarioConfig::default()
    }
}

fn csv_bytes(config: &ScenarioConfig) -> Vec<u8> {
    let mut out = Vec::new();
    write_results_csv(&run_scenario(config).unwrap(), &mut out).unwrap();
    out
}

#[test]
fn one_realization_one_architecture_one_row() {
    let config = ScenarioConfig {
        architectures: vec![ArchitectureKind::TriHybrid],
        delta_c: vec![1.0],
        ..small(1)
    };
    let rows = run_scenario(&config).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].seed, config.base_seed);
    assert!(rows[0].is_ok());
    assert!(rows[0].trace.is_none());
}

#[test]
fn row_count_and_order() {
    let config = ScenarioConfig {
        delta_c: vec![1.0, 0.0, 0.5],
        base_seed: 40,
        ..small(3)
    };
    let rows = run_scenario(&config).unwrap();
    assert_eq!(rows.len(), 5 * 3 * 3);
    for w in rows.windows(2) {
        assert!((w[0].arch, w[0].delta_c, w[0].seed) < (w[1].arch, w[1].delta_c, w[1].seed));
    }
    assert!(rows.iter().all(|r| (40..43).contains(&r.seed)));
}

#[test]
fn identical_config_gives_identical_bytes() {
    let config = ScenarioConfig {
        delta_c: vec![0.075, 1.0],
        ..small(4)
    };
    let a = csv_bytes(&config);
    assert_eq!(a, csv_bytes(&config));
    let serial = ScenarioConfig {
        workers: Some(1),
        ..config.clone()
    };
    let wide = ScenarioConfig {
        workers: Some(4),
        ..config
    };
    assert_eq!(a, csv_bytes(&serial));
    assert_eq!(a, csv_bytes(&wide));
    let header = String::from_utf8(a).unwrap();
    assert_eq!(header.lines().next().unwrap(), RESULT_HEADER.join(","));
}

#[test]
fn emitted_files_round_trip() {
    let config = small(2);
    let rows = run_scenario(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("rows.json");
    emit(&rows, OutputFormat::Json, &json).unwrap();
    let back = read_results_json(std::fs::File::open(&json).unwrap()).unwrap();
    assert_eq!(back.len(), rows.len());
    let csv = dir.path().join("rows.csv");
    emit(&back, OutputFormat::Csv, &csv).unwrap();
    assert_eq!(
        std::fs::read_to_string(&csv).unwrap().lines().count(),
        rows.len() + 1
    );

    // a second JSON pass is lossless once values carry 12 digits
    let again = dir.path().join("again.json");
    emit(&back, OutputFormat::Json, &again).unwrap();
    assert_eq!(
        read_results_json(std::fs::File::open(&again).unwrap()).unwrap(),
        back
    );
}

#[test]
fn architectures_share_each_realization() {
    // with δ_c = 1 the SN baselines see the same channel, and the fully
    // digital matched filter bounds the phase-only design
    let config = ScenarioConfig {
        delta_c: vec![1.0],
        architectures: vec![ArchitectureKind::FdSn, ArchitectureKind::HbfSn],
        ..small(5)
    };
    let rows = run_scenario(&config).unwrap();
    for seed in 0..5 {
        let get = |a| rows.iter().find(|r| r.arch == a && r.seed == seed).unwrap();
        assert!(
            get(ArchitectureKind::FdSn).snr >= get(ArchitectureKind::HbfSn).snr * (1.0 - 1e-12)
        );
    }
}

#[test]
fn aggregates_match_recomputation() {
    let config = ScenarioConfig {
        delta_c: vec![0.0, 1.0],
        ..small(6)
    };
    let rows = run_scenario(&config).unwrap();
    let agg = sweep_tradeoff(&config).unwrap();
    assert_eq!(agg, aggregate(&rows, 4));
    assert_eq!(agg.len(), 5 * 2);
    for a in &agg {
        let group: Vec<f64> = rows
            .iter()
            .filter(|r| r.arch == a.arch && r.delta_c == a.delta_c)
            .map(|r| r.rate)
            .collect();
        let mean = group.iter().sum::<f64>() / group.len() as f64;
        assert!((a.rate.mean - mean).abs() <= 1e-12 * mean);
        assert_eq!(a.n + a.failures, 6);
    }
}

#[test]
fn single_weight_gives_one_point_per_architecture() {
    let agg = sweep_tradeoff(&small(2)).unwrap();
    assert_eq!(agg.len(), 5);
    assert!(agg.iter().all(|a| a.delta_c == 0.075));
}

#[test]
fn single_nu_sweep_equals_scenario() {
    let config = small(3);
    let swept = sweep_nu(&config, &[4]).unwrap();
    assert_eq!(swept, sweep_tradeoff(&config).unwrap());
    assert!(sweep_nu(&config, &[]).is_err());
    let two = sweep_nu(&config, &[2, 6]).unwrap();
    assert_eq!(two.len(), 10);
    assert_eq!(two[0].elements_per_waveguide, 2);
    assert_eq!(two[9].elements_per_waveguide, 6);
}

#[test]
fn every_architecture_fills_the_power_budget() {
    let rows = run_scenario(&small(2)).unwrap();
    for r in &rows {
        assert!(
            (r.tx_mw - 10.0).abs() < 1e-9,
            "{} transmits {} mW",
            r.arch,
            r.tx_mw
        );
    }
}

#[test]
fn manifold_solver_and_traces() {
    let config = ScenarioConfig {
        architectures: vec![ArchitectureKind::TriHybrid],
        tri_hybrid_solver: TriHybridSolver::Manifold,
        capture_traces: true,
        ..small(2)
    };
    let rows = run_scenario(&config).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        let trace = r.trace.as_ref().unwrap();
        assert_eq!(trace.len(), r.iters);
        assert!(trace.is_monotone(1e-9));
    }
}
