use serde::{Deserialize, Serialize};

use crate::baselines::ArchitectureKind;
use crate::error::{Error, Result};

use super::config::ScenarioConfig;
use super::runner::{run_scenario, ResultRow};

/// Sample mean and standard error of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std_error }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub arch: ArchitectureKind,
    pub elements_per_waveguide: usize,
    pub delta_c: f64,
    /// Successful realizations that entered the means.
    pub n: usize,
    pub failures: usize,
    pub snr: Estimate,
    pub rate: Estimate,
    pub sensing_mw: Estimate,
    pub ee: Estimate,
    pub converged_fraction: f64,
}

/// Groups rows by (architecture, δ_c) and averages the successful ones.
pub fn aggregate(rows: &[ResultRow], elements_per_waveguide: usize) -> Vec<AggregateRow> {
    let mut keys: Vec<(ArchitectureKind, f64)> = rows.iter().map(|r| (r.arch, r.delta_c)).collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.dedup_by(|a, b| a.0 == b.0 && a.1.total_cmp(&b.1).is_eq());
    keys.into_iter()
        .map(|(arch, delta_c)| {
            let group: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.arch == arch && r.delta_c.total_cmp(&delta_c).is_eq())
                .collect();
            let ok: Vec<&ResultRow> = group.iter().copied().filter(|r| r.is_ok()).collect();
            let collect = |f: fn(&ResultRow) -> f64| ok.iter().map(|r| f(r)).collect::<Vec<_>>();
            AggregateRow {
                arch,
                elements_per_waveguide,
                delta_c,
                n: ok.len(),
                failures: group.len() - ok.len(),
                snr: Estimate::of(&collect(|r| r.snr)),
                rate: Estimate::of(&collect(|r| r.rate)),
                sensing_mw: Estimate::of(&collect(|r| r.sensing_mw)),
                ee: Estimate::of(&collect(|r| r.ee)),
                converged_fraction: group.iter().filter(|r| r.converged).count() as f64
                    / group.len() as f64,
            }
        })
        .collect()
}

/// Communications/sensing tradeoff: per-(architecture, δ_c) means over the
/// configured realizations.
pub fn sweep_tradeoff(config: &ScenarioConfig) -> Result<Vec<AggregateRow>> {
    Ok(aggregate(
        &run_scenario(config)?,
        config.elements_per_waveguide,
    ))
}

/// Repeats the scenario for each waveguide length `N_u`, rebuilding the DMA
/// and the SN/SA baselines every time.
pub fn sweep_nu(config: &ScenarioConfig, nu_values: &[usize]) -> Result<Vec<AggregateRow>> {
    if nu_values.is_empty() {
        return Err(Error::InvalidConfig(
            "N_u sweep needs at least one value".into(),
        ));
    }
    let mut out = Vec::new();
    for &nu in nu_values {
        let cfg = ScenarioConfig {
            elements_per_waveguide: nu,
            ..config.clone()
        };
        out.extend(sweep_tradeoff(&cfg)?);
    }
    Ok(out)
}
