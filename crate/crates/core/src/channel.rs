//! Geometric Saleh-Valenzuela channel realizations.
//!
//! A realization is a set of `L` far-field paths with complex gains
//! `α_l ~ CN(0, 1)` and uniformly drawn directions. The same path set can be
//! evaluated on any array geometry, which is how the experiment harness gives
//! every architecture an identical propagation environment:
//!
//! `h̄ = sqrt(N/L) Σ_l α_l a(θ_l, φ_l)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::{steering_vector, ArrayGeometry, TargetDirection};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvChannelParams {
    pub n_paths: usize,
    pub azimuth_range: (f64, f64),
    pub elevation_range: (f64, f64),
    pub noise_power_mw: f64,
}

impl Default for SvChannelParams {
    fn default() -> Self {
        Self {
            n_paths: 5,
            azimuth_range: (-PI / 3.0, PI / 3.0),
            elevation_range: (PI / 6.0, 5.0 * PI / 6.0),
            noise_power_mw: 1.0,
        }
    }
}

impl SvChannelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::InvalidConfig(
                "channel needs at least one path".into(),
            ));
        }
        if !(self.noise_power_mw > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise power must be positive, got {} mW",
                self.noise_power_mw
            )));
        }
        for (lo, hi) in [self.azimuth_range, self.elevation_range] {
            if !(lo <= hi) {
                return Err(Error::InvalidConfig(format!(
                    "empty angle range [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// Direction drawn from the configured uniform azimuth/elevation ranges.
    pub fn sample_direction<R: Rng + ?Sized>(&self, rng: &mut R) -> TargetDirection {
        TargetDirection::new(
            uniform(rng, self.azimuth_range),
            uniform(rng, self.elevation_range),
        )
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// Circularly-symmetric standard complex normal sample.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvPath {
    pub gain_re: f64,
    pub gain_im: f64,
    pub azimuth: f64,
    pub elevation: f64,
}

impl SvPath {
    pub fn new(gain: Complex64, direction: TargetDirection) -> Self {
        Self {
            gain_re: gain.re,
            gain_im: gain.im,
            azimuth: direction.azimuth,
            elevation: direction.elevation,
        }
    }

    pub fn gain(&self) -> Complex64 {
        Complex64::new(self.gain_re, self.gain_im)
    }

    pub fn direction(&self) -> TargetDirection {
        TargetDirection::new(self.azimuth, self.elevation)
    }
}

/// Geometry-independent description of one channel draw. This is also the
/// JSON exchange format for channel realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvDraw {
    pub seed: u64,
    #[serde(rename = "L")]
    pub n_paths: usize,
    pub paths: Vec<SvPath>,
    pub sigma2_mw: f64,
}

impl SvDraw {
    pub fn sample(params: &SvChannelParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let paths = (0..params.n_paths)
            .map(|_| {
                let gain = complex_normal(&mut rng);
                SvPath::new(gain, params.sample_direction(&mut rng))
            })
            .collect();
        Ok(Self {
            seed,
            n_paths: params.n_paths,
            paths,
            sigma2_mw: params.noise_power_mw,
        })
    }

    pub fn realize(&self, geometry: &ArrayGeometry) -> Result<ChannelRealization> {
        if self.paths.is_empty() {
            return Err(Error::InvalidConfig(
                "channel needs at least one path".into(),
            ));
        }
        check_len("channel paths", self.n_paths, self.paths.len())?;
        let n = geometry.n_elements();
        let scale = (n as f64 / self.n_paths as f64).sqrt();
        let mut raw = vec![Complex64::new(0.0, 0.0); n];
        for path in &self.paths {
            let alpha = path.gain() * scale;
            for (h, a) in raw
                .iter_mut()
                .zip(steering_vector(geometry, path.direction()))
            {
                *h += alpha * a;
            }
        }
        ChannelRealization::new(raw, self.sigma2_mw)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub raw_channel: Vec<Complex64>,
    pub noise_power: f64,
    pub normalized_channel: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn new(raw_channel: Vec<Complex64>, noise_power_mw: f64) -> Result<Self> {
        if !(noise_power_mw > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise power must be positive, got {noise_power_mw} mW"
            )));
        }
        let inv_sigma = 1.0 / noise_power_mw.sqrt();
        let normalized_channel = raw_channel.iter().map(|h| h * inv_sigma).collect();
        Ok(Self {
            raw_channel,
            noise_power: noise_power_mw,
            normalized_channel,
        })
    }
}

pub fn sample_sv_channel(
    geometry: &ArrayGeometry,
    params: &SvChannelParams,
    seed: u64,
) -> Result<ChannelRealization> {
    SvDraw::sample(params, seed)?.realize(geometry)
}
