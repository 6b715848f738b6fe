//! Browser bindings for the tri-hybrid beamforming demo. Each exported
//! function returns a JSON string for the page in `www/` to plot. The plain
//! Rust functions behind them are public so they can be tested natively.

use serde::Serialize;
use trihybrid::baselines::{solve_fd, solve_manifold, ArchitectureKind};
use trihybrid::geometry::{steering_vector, ArrayGeometry, TargetDirection};
use trihybrid::harness::{build_instance, sweep_tradeoff, AggregateRow, ScenarioConfig};
use trihybrid::model::inner;
use trihybrid::optimizer::solve;
use trihybrid::{Complex64, Result};
use wasm_bindgen::prelude::*;

/// Azimuth samples of the beam pattern, from -90° to 90°.
pub const PATTERN_POINTS: usize = 361;

fn config(n_waveguides: usize, elements_per_waveguide: usize, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        n_waveguides,
        elements_per_waveguide,
        base_seed: seed,
        ..ScenarioConfig::default()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BeamPattern {
    pub azimuth_deg: Vec<f64>,
    /// Radiated power towards each azimuth at the target elevation, in dB
    /// relative to the fully-digital peak.
    pub tri_hybrid_db: Vec<f64>,
    pub fully_digital_db: Vec<f64>,
    pub target_azimuth_deg: f64,
    pub rate_bps_hz: f64,
    pub sensing_mw: f64,
    pub ee_bits_per_joule: f64,
    pub iterations: usize,
}

fn pattern(beam: &[Complex64], geometry: &ArrayGeometry, elevation: f64, az: &[f64]) -> Vec<f64> {
    az.iter()
        .map(|deg| {
            let a = steering_vector(geometry, TargetDirection::new(deg.to_radians(), elevation));
            inner(&a, beam).norm_sqr()
        })
        .collect()
}

fn to_db(values: &[f64], reference: f64) -> Vec<f64> {
    values
        .iter()
        .map(|v| (10.0 * (v / reference).log10()).max(-60.0))
        .collect()
}

/// Optimizes the tri-hybrid design on one channel draw and samples its beam
/// pattern next to the fully-digital beam for the same scene.
pub fn beam_pattern(
    n_waveguides: usize,
    elements_per_waveguide: usize,
    delta_c: f64,
    seed: u64,
) -> Result<BeamPattern> {
    let config = config(n_waveguides, elements_per_waveguide, seed);
    let tri = build_instance(&config, ArchitectureKind::TriHybrid, seed, delta_c)?;
    let layout = tri.geometry.layout();
    let sol = solve(
        &tri.problem,
        layout,
        &tri.gains,
        &config.solver.with_seed(seed),
    )?;
    let metrics = sol.metrics(
        &tri.problem,
        layout,
        &config.power_model,
        tri.descriptor.counts,
    )?;

    let fd = build_instance(&config, ArchitectureKind::FdSn, seed, delta_c)?;
    let fd_beam = solve_fd(&fd.problem)?.precoder;

    let azimuth_deg: Vec<f64> = (0..PATTERN_POINTS)
        .map(|i| -90.0 + 180.0 * i as f64 / (PATTERN_POINTS - 1) as f64)
        .collect();
    let elevation = tri.target.elevation;
    let tri_power = pattern(
        &sol.transmit_beam(layout)?,
        &tri.geometry,
        elevation,
        &azimuth_deg,
    );
    let fd_power = pattern(&fd_beam, &fd.geometry, elevation, &azimuth_deg);
    let peak = fd_power
        .iter()
        .chain(&tri_power)
        .cloned()
        .fold(f64::MIN_POSITIVE, f64::max);

    Ok(BeamPattern {
        tri_hybrid_db: to_db(&tri_power, peak),
        fully_digital_db: to_db(&fd_power, peak),
        azimuth_deg,
        target_azimuth_deg: tri.target.azimuth.to_degrees(),
        rate_bps_hz: metrics.rate,
        sensing_mw: metrics.sensing_power_mw,
        ee_bits_per_joule: metrics.ee,
        iterations: sol.iterations(),
    })
}

/// Mean rate and sensing power per architecture over the default weight grid.
pub fn tradeoff(
    n_waveguides: usize,
    elements_per_waveguide: usize,
    realizations: usize,
    seed: u64,
) -> Result<Vec<AggregateRow>> {
    let config = ScenarioConfig {
        delta_c: ScenarioConfig::tradeoff_grid(),
        n_realizations: realizations,
        record_wall_time: false,
        ..config(n_waveguides, elements_per_waveguide, seed)
    };
    sweep_tradeoff(&config)
}

#[derive(Debug, Clone, Serialize)]
pub struct Convergence {
    /// Ratio objective after each closed-form MM iteration.
    pub closed_form: Vec<f64>,
    /// Ratio objective after each manifold-solver iteration.
    pub manifold: Vec<f64>,
}

/// Objective traces of both tri-hybrid solvers from the same starting point.
pub fn convergence(
    n_waveguides: usize,
    elements_per_waveguide: usize,
    delta_c: f64,
    seed: u64,
) -> Result<Convergence> {
    let config = config(n_waveguides, elements_per_waveguide, seed);
    let inst = build_instance(&config, ArchitectureKind::TriHybrid, seed, delta_c)?;
    let layout = inst.geometry.layout();
    let options = config.solver.with_seed(seed);
    let closed = solve(&inst.problem, layout, &inst.gains, &options)?;
    let manifold = solve_manifold(
        &inst.problem,
        layout,
        &inst.gains,
        &options,
        &config.manifold,
    )?;
    Ok(Convergence {
        closed_form: closed.trace.ratios().collect(),
        manifold: manifold.trace.ratios().collect(),
    })
}

fn json<T: Serialize>(value: Result<T>) -> std::result::Result<String, JsError> {
    let value = value.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = beamPattern)]
pub fn beam_pattern_json(
    n_waveguides: usize,
    elements_per_waveguide: usize,
    delta_c: f64,
    seed: u32,
) -> std::result::Result<String, JsError> {
    json(beam_pattern(
        n_waveguides,
        elements_per_waveguide,
        delta_c,
        seed.into(),
    ))
}

#[wasm_bindgen(js_name = tradeoff)]
pub fn tradeoff_json(
    n_waveguides: usize,
    elements_per_waveguide: usize,
    realizations: usize,
    seed: u32,
) -> std::result::Result<String, JsError> {
    json(tradeoff(
        n_waveguides,
        elements_per_waveguide,
        realizations,
        seed.into(),
    ))
}

#[wasm_bindgen(js_name = convergence)]
pub fn convergence_json(
    n_waveguides: usize,
    elements_per_waveguide: usize,
    delta_c: f64,
    seed: u32,
) -> std::result::Result<String, JsError> {
    json(convergence(
        n_waveguides,
        elements_per_waveguide,
        delta_c,
        seed.into(),
    ))
}
