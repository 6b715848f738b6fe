use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize};

use crate::baselines::{
    build_architecture, solve_fd, solve_hbf, solve_manifold, ArchitectureDescriptor,
    ArchitectureKind,
};
use crate::channel::SvDraw;
use crate::clock::Stopwatch;
use crate::error::Result;
use crate::geometry::{
    build_dma_geometry, propagation_gains, steering_vector, ArrayGeometry, TargetDirection,
};
use crate::model::{IsacProblem, Metrics};
use crate::optimizer::{solve, IterationTrace};

use super::config::{ScenarioConfig, TriHybridSolver};

fn nullable_f64<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(de)?.unwrap_or(f64::NAN))
}

/// One (architecture, δ_c, realization) outcome. Failed solves carry NaN metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub arch: ArchitectureKind,
    #[serde(deserialize_with = "nullable_f64")]
    pub delta_c: f64,
    pub seed: u64,
    #[serde(deserialize_with = "nullable_f64")]
    pub snr: f64,
    #[serde(deserialize_with = "nullable_f64")]
    pub rate: f64,
    #[serde(deserialize_with = "nullable_f64")]
    pub sensing_mw: f64,
    #[serde(deserialize_with = "nullable_f64")]
    pub tx_mw: f64,
    #[serde(deserialize_with = "nullable_f64")]
    pub ee: f64,
    pub iters: usize,
    #[serde(deserialize_with = "nullable_f64")]
    pub wall_ms: f64,
    pub converged: bool,
    #[serde(skip)]
    pub trace: Option<IterationTrace>,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.rate.is_finite()
    }
}

/// Target direction of realization `seed`, drawn on a separate RNG stream
/// from the channel paths.
pub fn target_direction(config: &ScenarioConfig, seed: u64) -> TargetDirection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    config.channel_params().sample_direction(&mut rng)
}

/// The problem one architecture faces on realization `seed`, exactly as
/// [`run_scenario`] builds it.
#[derive(Debug, Clone)]
pub struct ScenarioInstance {
    pub problem: IsacProblem,
    pub geometry: ArrayGeometry,
    pub descriptor: ArchitectureDescriptor,
    /// Waveguide propagation gains of the DMA; unused by the baselines.
    pub gains: Vec<Complex64>,
    pub target: TargetDirection,
}

pub fn build_instance(
    config: &ScenarioConfig,
    kind: ArchitectureKind,
    seed: u64,
    delta_c: f64,
) -> Result<ScenarioInstance> {
    config.validate()?;
    let base = build_dma_geometry(
        config.n_waveguides,
        config.elements_per_waveguide,
        config.carrier_frequency_hz,
    )?;
    let gains = propagation_gains(
        &base,
        config.attenuation_per_meter,
        config.wavenumber_per_meter,
    )?;
    let (geometry, descriptor) = build_architecture(kind, &base)?;
    let channel = SvDraw::sample(&config.channel_params(), seed)?.realize(&geometry)?;
    let target = target_direction(config, seed);
    let problem = IsacProblem::new(
        channel.normalized_channel,
        steering_vector(&geometry, target),
        delta_c,
        1.0 - delta_c,
        config.power_budget_mw(),
    )?;
    Ok(ScenarioInstance {
        problem,
        geometry,
        descriptor,
        gains,
        target,
    })
}

struct Prepared {
    geometry: ArrayGeometry,
    descriptor: ArchitectureDescriptor,
    gains: Vec<Complex64>,
}

struct Outcome {
    metrics: Metrics,
    iterations: usize,
    converged: bool,
    trace: Option<IterationTrace>,
}

fn solve_one(
    config: &ScenarioConfig,
    arch: &Prepared,
    problem: &IsacProblem,
    seed: u64,
) -> Result<Outcome> {
    let options = config.solver.with_seed(seed);
    let model = &config.power_model;
    let counts = arch.descriptor.counts;
    match arch.descriptor.kind {
        ArchitectureKind::TriHybrid => {
            let layout = arch.geometry.layout();
            let sol = match config.tri_hybrid_solver {
                TriHybridSolver::ClosedForm => solve(problem, layout, &arch.gains, &options)?,
                TriHybridSolver::Manifold => {
                    solve_manifold(problem, layout, &arch.gains, &options, &config.manifold)?
                }
            };
            Ok(Outcome {
                metrics: sol.metrics(problem, layout, model, counts)?,
                iterations: sol.iterations(),
                converged: sol.converged,
                trace: config.capture_traces.then(|| sol.trace.clone()),
            })
        }
        ArchitectureKind::FdSn | ArchitectureKind::FdSa => {
            let sol = solve_fd(problem)?;
            Ok(Outcome {
                metrics: Metrics::of_beam(problem, &sol.precoder, model, counts)?,
                iterations: 0,
                converged: true,
                trace: None,
            })
        }
        ArchitectureKind::HbfSn | ArchitectureKind::HbfSa => {
            let sol = solve_hbf(problem, &arch.descriptor, &options)?;
            Ok(Outcome {
                metrics: Metrics::of_beam(problem, &sol.transmit_beam(), model, counts)?,
                iterations: sol.objective_trace.len() - 1,
                converged: sol.converged,
                trace: None,
            })
        }
    }
}

fn run_realization(config: &ScenarioConfig, archs: &[Prepared], index: usize) -> Vec<ResultRow> {
    let seed = config.base_seed.wrapping_add(index as u64);
    let draw = SvDraw::sample(&config.channel_params(), seed);
    let target = target_direction(config, seed);
    let p_t = config.power_budget_mw();
    let mut rows = Vec::with_capacity(archs.len() * config.delta_c.len());
    for arch in archs {
        let channel = draw
            .as_ref()
            .map_err(|e| e.to_string())
            .and_then(|d| d.realize(&arch.geometry).map_err(|e| e.to_string()));
        let steering = steering_vector(&arch.geometry, target);
        for &delta_c in &config.delta_c {
            let clock = Stopwatch::start();
            let outcome = channel.as_ref().map_err(|e| e.clone()).and_then(|ch| {
                IsacProblem::new(
                    ch.normalized_channel.clone(),
                    steering.clone(),
                    delta_c,
                    1.0 - delta_c,
                    p_t,
                )
                .and_then(|p| solve_one(config, arch, &p, seed))
                .map_err(|e| e.to_string())
            });
            let wall_ms = if config.record_wall_time {
                clock.elapsed_ms()
            } else {
                0.0
            };
            let row = match outcome {
                Ok(o) => ResultRow {
                    arch: arch.descriptor.kind,
                    delta_c,
                    seed,
                    snr: o.metrics.snr,
                    rate: o.metrics.rate,
                    sensing_mw: o.metrics.sensing_power_mw,
                    tx_mw: o.metrics.tx_power_mw,
                    ee: o.metrics.ee,
                    iters: o.iterations,
                    wall_ms,
                    converged: o.converged,
                    trace: o.trace,
                },
                Err(_) => ResultRow {
                    arch: arch.descriptor.kind,
                    delta_c,
                    seed,
                    snr: f64::NAN,
                    rate: f64::NAN,
                    sensing_mw: f64::NAN,
                    tx_mw: f64::NAN,
                    ee: f64::NAN,
                    iters: 0,
                    wall_ms,
                    converged: false,
                    trace: None,
                },
            };
            rows.push(row);
        }
    }
    rows
}

/// Runs every (architecture, δ_c) pair on each channel realization. Rows come
/// back ordered by (architecture, δ_c, seed) regardless of worker count.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let base = build_dma_geometry(
        config.n_waveguides,
        config.elements_per_waveguide,
        config.carrier_frequency_hz,
    )?;
    let gains = propagation_gains(
        &base,
        config.attenuation_per_meter,
        config.wavenumber_per_meter,
    )?;
    let mut kinds = config.architectures.clone();
    kinds.sort();
    kinds.dedup();
    let archs = kinds
        .into_iter()
        .map(|kind| {
            let (geometry, descriptor) = build_architecture(kind, &base)?;
            Ok(Prepared {
                geometry,
                descriptor,
                gains: gains.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<ResultRow> = run_all(config, &archs)?;
    rows.sort_by(|a, b| {
        a.arch
            .cmp(&b.arch)
            .then(a.delta_c.total_cmp(&b.delta_c))
            .then(a.seed.cmp(&b.seed))
    });
    Ok(rows)
}

#[cfg(feature = "parallel")]
fn run_all(config: &ScenarioConfig, archs: &[Prepared]) -> Result<Vec<ResultRow>> {
    use rayon::prelude::*;
    let work = || {
        (0..config.n_realizations)
            .into_par_iter()
            .flat_map_iter(|r| run_realization(config, archs, r))
            .collect()
    };
    match config.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| crate::error::Error::InvalidConfig(e.to_string()))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_all(config: &ScenarioConfig, archs: &[Prepared]) -> Result<Vec<ResultRow>> {
    Ok((0..config.n_realizations)
        .flat_map(|r| run_realization(config, archs, r))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_matches_scenario_rows() {
        let config = ScenarioConfig {
            n_waveguides: 2,
            elements_per_waveguide: 3,
            n_realizations: 2,
            base_seed: 11,
            delta_c: vec![0.5],
            record_wall_time: false,
            ..ScenarioConfig::default()
        };
        let rows = run_scenario(&config).unwrap();
        for row in &rows {
            let inst = build_instance(&config, row.arch, row.seed, 0.5).unwrap();
            let prepared = Prepared {
                geometry: inst.geometry.clone(),
                descriptor: inst.descriptor,
                gains: inst.gains.clone(),
            };
            let o = solve_one(&config, &prepared, &inst.problem, row.seed).unwrap();
            assert_eq!(o.metrics.snr, row.snr);
            assert_eq!(o.metrics.sensing_power_mw, row.sensing_mw);
        }
    }
}
