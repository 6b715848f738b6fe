use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{ArchitectureKind, ManifoldOptions};
use crate::channel::SvChannelParams;
use crate::error::{Error, Result};
use crate::geometry::{DEFAULT_ATTENUATION_PER_METER, DEFAULT_WAVENUMBER_PER_METER};
use crate::model::PowerModel;
use crate::optimizer::SolverOptions;

/// Which solver designs the tri-hybrid beamformer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriHybridSolver {
    #[default]
    ClosedForm,
    Manifold,
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Monte-Carlo scenario. Every field has a default, so a config file only
/// needs the values it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub n_waveguides: usize,
    pub elements_per_waveguide: usize,
    pub carrier_frequency_hz: f64,
    pub power_budget_dbm: f64,
    pub noise_power_dbm: f64,
    /// Communications weights; the sensing weight is `1 − δ_c`.
    pub delta_c: Vec<f64>,
    pub architectures: Vec<ArchitectureKind>,
    pub n_realizations: usize,
    pub base_seed: u64,
    pub n_paths: usize,
    pub azimuth_range: (f64, f64),
    pub elevation_range: (f64, f64),
    pub attenuation_per_meter: f64,
    pub wavenumber_per_meter: f64,
    pub power_model: PowerModel,
    pub solver: SolverOptions,
    pub tri_hybrid_solver: TriHybridSolver,
    pub manifold: ManifoldOptions,
    /// Worker threads; `None` uses all cores.
    pub workers: Option<usize>,
    /// When false `wall_ms` is written as 0 so output files are byte-identical.
    pub record_wall_time: bool,
    pub capture_traces: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_waveguides: 8,
            elements_per_waveguide: 16,
            carrier_frequency_hz: 28e9,
            power_budget_dbm: 10.0,
            noise_power_dbm: 0.0,
            delta_c: vec![0.075],
            architectures: ArchitectureKind::ALL.to_vec(),
            n_realizations: 100,
            base_seed: 0,
            n_paths: 5,
            azimuth_range: (-PI / 3.0, PI / 3.0),
            elevation_range: (PI / 6.0, 5.0 * PI / 6.0),
            attenuation_per_meter: DEFAULT_ATTENUATION_PER_METER,
            wavenumber_per_meter: DEFAULT_WAVENUMBER_PER_METER,
            power_model: PowerModel::default(),
            solver: SolverOptions::default(),
            tri_hybrid_solver: TriHybridSolver::ClosedForm,
            manifold: ManifoldOptions::default(),
            workers: None,
            record_wall_time: true,
            capture_traces: false,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::InvalidConfig(
                "n_realizations must be at least 1".into(),
            ));
        }
        if let Some(bad) = self.delta_c.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            return Err(Error::InvalidConfig(format!(
                "delta_c {bad} outside [0, 1]"
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        self.power_model.validate()?;
        self.solver.validate()?;
        self.channel_params().validate()
    }

    pub fn power_budget_mw(&self) -> f64 {
        dbm_to_mw(self.power_budget_dbm)
    }

    pub fn noise_power_mw(&self) -> f64 {
        dbm_to_mw(self.noise_power_dbm)
    }

    pub fn channel_params(&self) -> SvChannelParams {
        SvChannelParams {
            n_paths: self.n_paths,
            azimuth_range: self.azimuth_range,
            elevation_range: self.elevation_range,
            noise_power_mw: self.noise_power_mw(),
        }
    }

    /// Default communications-weight grid of the tradeoff sweep.
    pub fn tradeoff_grid() -> Vec<f64> {
        vec![0.0, 0.075, 0.25, 0.5, 0.75, 1.0]
    }
}
