#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trihybrid::channel::SvDraw;
use trihybrid::geometry::{
    build_dma_geometry, propagation_gains, steering_vector, BlockLayout,
    DEFAULT_ATTENUATION_PER_METER, DEFAULT_WAVENUMBER_PER_METER,
};
use trihybrid::harness::{target_direction, ScenarioConfig};
use trihybrid::model::IsacProblem;
use trihybrid::Complex64;

pub struct Instance {
    pub problem: IsacProblem,
    pub layout: BlockLayout,
    pub gains: Vec<Complex64>,
}

/// The DMA problem the harness would build for realization `seed`.
pub fn sv_instance(n_w: usize, n_u: usize, delta_c: f64, seed: u64) -> Instance {
    let config = ScenarioConfig {
        n_waveguides: n_w,
        elements_per_waveguide: n_u,
        ..ScenarioConfig::default()
    };
    let geometry = build_dma_geometry(n_w, n_u, config.carrier_frequency_hz).unwrap();
    let gains = propagation_gains(
        &geometry,
        DEFAULT_ATTENUATION_PER_METER,
        DEFAULT_WAVENUMBER_PER_METER,
    )
    .unwrap();
    let channel = SvDraw::sample(&config.channel_params(), seed)
        .unwrap()
        .realize(&geometry)
        .unwrap();
    let steering = steering_vector(&geometry, target_direction(&config, seed));
    let problem = IsacProblem::new(
        channel.normalized_channel,
        steering,
        delta_c,
        1.0 - delta_c,
        config.power_budget_mw(),
    )
    .unwrap();
    Instance {
        problem,
        layout: geometry.layout(),
        gains,
    }
}

pub fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect()
}

/// Gains with `0 < |q_j| < 1` and arbitrary phase.
pub fn random_gains(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            Complex64::from_polar(
                rng.random_range(0.05..0.999),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect()
}

/// Random layout with at most `max_elements` elements and a random problem on it.
pub fn random_instance(seed: u64, max_elements: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_w = rng.random_range(1..=4usize);
    let n_u = rng.random_range(1..=(max_elements / n_w).max(1));
    let layout = BlockLayout::new(n_w, n_u).unwrap();
    let n = layout.n_elements();
    let scale = rng.random_range(0.1..10.0);
    let h: Vec<Complex64> = random_complex(&mut rng, n)
        .into_iter()
        .map(|x| x * scale)
        .collect();
    let g = random_complex(&mut rng, n);
    let delta_c = rng.random_range(0.0..=1.0);
    let problem =
        IsacProblem::new(h, g, delta_c, 1.0 - delta_c, rng.random_range(0.5..20.0)).unwrap();
    Instance {
        problem,
        gains: random_gains(&mut rng, n),
        layout,
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
