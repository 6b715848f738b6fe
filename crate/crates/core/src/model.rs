//! Tri-hybrid beamformer state and performance metrics.
//!
//! The transmit beam is `x = M f w` where `M` is the block-diagonal DMA
//! matrix, `f` the per-waveguide analog phases and `w` the digital weight.
//! `M` is never formed: [`compose_effective`] applies it through the block
//! layout, and all metrics are written in terms of the effective beam `Mf`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::BlockLayout;

/// Accepted deviation of a supposedly unit-modulus entry before it is rejected.
pub const UNIT_MODULUS_TOL: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `z / |z|`, or `fallback` when `z` has no usable phase.
pub fn phase_of(z: Complex64, fallback: Complex64) -> Complex64 {
    let r = z.norm();
    if r > f64::MIN_POSITIVE && r.is_finite() {
        z / r
    } else {
        fallback
    }
}

pub(crate) fn check_unit_modulus(what: &'static str, v: &[Complex64]) -> Result<()> {
    for (index, z) in v.iter().enumerate() {
        let modulus = z.norm();
        if (modulus - 1.0).abs() > UNIT_MODULUS_TOL {
            return Err(Error::NotUnitModulus {
                what,
                index,
                modulus,
            });
        }
    }
    Ok(())
}

fn renormalize(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|z| z / z.norm()).collect()
}

/// `xᴴ y`
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn energy(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Lorentzian-constrained DMA weights `m_j = q_j (i + ψ_j) / 2`.
///
/// `psi` must be unit modulus within [`UNIT_MODULUS_TOL`]; it is renormalized
/// to exactly unit modulus before use.
pub fn lorentzian_map(psi: &[Complex64], q: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len("propagation gains", psi.len(), q.len())?;
    check_unit_modulus("psi", psi)?;
    Ok(lorentzian_map_unchecked(psi, q))
}

pub(crate) fn lorentzian_map_unchecked(psi: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    psi.iter()
        .zip(q)
        .map(|(p, qj)| qj * (I + p / p.norm()) * 0.5)
        .collect()
}

/// Fixed waveguide gains `q` together with the tunable Lorentzian phases `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DmaState {
    gains: Vec<Complex64>,
    phases: Vec<Complex64>,
    weights: Vec<Complex64>,
}

impl DmaState {
    pub fn new(gains: Vec<Complex64>, phases: Vec<Complex64>) -> Result<Self> {
        let weights = lorentzian_map(&phases, &gains)?;
        Ok(Self {
            phases: renormalize(&phases),
            gains,
            weights,
        })
    }

    pub fn set_phases(&mut self, phases: Vec<Complex64>) -> Result<()> {
        self.weights = lorentzian_map(&phases, &self.gains)?;
        self.phases = renormalize(&phases);
        Ok(())
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    /// The element weights `m`.
    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// `Σ|m_j|² = tr(M Mᴴ)`.
    pub fn energy(&self) -> f64 {
        energy(&self.weights)
    }
}

/// Per-waveguide analog phase shifters, `|f_i| = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogBeamformer {
    weights: Vec<Complex64>,
}

impl AnalogBeamformer {
    pub fn new(weights: Vec<Complex64>) -> Result<Self> {
        check_unit_modulus("analog weight", &weights)?;
        Ok(Self {
            weights: renormalize(&weights),
        })
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigitalWeight {
    pub value: Complex64,
}

/// One instance of the weighted communications/sensing beamforming problem.
#[derive(Debug, Clone, PartialEq)]
pub struct IsacProblem {
    /// Noise-normalized user channel `h`.
    pub comm_channel: Vec<Complex64>,
    /// Steering vector `g` toward the sensing target.
    pub sensing_steering: Vec<Complex64>,
    pub weight_comm: f64,
    pub weight_sense: f64,
    /// Transmit power budget in mW.
    pub power_budget: f64,
}

impl IsacProblem {
    pub fn new(
        comm_channel: Vec<Complex64>,
        sensing_steering: Vec<Complex64>,
        weight_comm: f64,
        weight_sense: f64,
        power_budget: f64,
    ) -> Result<Self> {
        check_len(
            "sensing steering",
            comm_channel.len(),
            sensing_steering.len(),
        )?;
        if !(weight_comm >= 0.0 && weight_sense >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "objective weights must be nonnegative, got ({weight_comm}, {weight_sense})"
            )));
        }
        if weight_comm + weight_sense <= 0.0 {
            return Err(Error::InvalidConfig(
                "at least one objective weight must be positive".into(),
            ));
        }
        if !(power_budget > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "power budget must be positive, got {power_budget} mW"
            )));
        }
        Ok(Self {
            comm_channel,
            sensing_steering,
            weight_comm,
            weight_sense,
            power_budget,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.comm_channel.len()
    }

    /// `δ_c |hᴴv|² + δ_s |gᴴv|²` for an effective beam `v` (no digital weight).
    pub fn weighted_gain(&self, v: &[Complex64]) -> f64 {
        self.weight_comm * inner(&self.comm_channel, v).norm_sqr()
            + self.weight_sense * inner(&self.sensing_steering, v).norm_sqr()
    }

    /// `R x` with `R = δ_c h hᴴ + δ_s g gᴴ`, in O(N).
    pub fn apply_correlation(&self, x: &[Complex64]) -> Vec<Complex64> {
        let sh = inner(&self.comm_channel, x) * self.weight_comm;
        let sg = inner(&self.sensing_steering, x) * self.weight_sense;
        self.comm_channel
            .iter()
            .zip(&self.sensing_steering)
            .map(|(h, g)| h * sh + g * sg)
            .collect()
    }
}

/// `v = M f`, with `v_j = m_j f_{waveguide(j)}`.
pub fn compose_effective(
    m: &[Complex64],
    f: &[Complex64],
    layout: BlockLayout,
) -> Result<Vec<Complex64>> {
    check_len("DMA weights", layout.n_elements(), m.len())?;
    check_len("analog weights", layout.n_waveguides, f.len())?;
    let mut v = Vec::with_capacity(m.len());
    for (i, fi) in f.iter().enumerate() {
        v.extend(m[layout.block(i)].iter().map(|mj| mj * fi));
    }
    Ok(v)
}

/// `|hᴴ v w|²` where `v = Mf`.
pub fn snr(problem: &IsacProblem, v: &[Complex64], w: Complex64) -> f64 {
    (inner(&problem.comm_channel, v) * w).norm_sqr()
}

/// `|gᴴ v w|²` in mW.
pub fn sensing_power(problem: &IsacProblem, v: &[Complex64], w: Complex64) -> f64 {
    (inner(&problem.sensing_steering, v) * w).norm_sqr()
}

/// `‖M f w‖² = |w|² Σ|m_j|²`, valid for unit-modulus `f`.
pub fn transmit_power(m: &[Complex64], f: &[Complex64], w: Complex64) -> Result<f64> {
    check_unit_modulus("analog weight", f)?;
    Ok(w.norm_sqr() * energy(m))
}

pub fn isac_objective(problem: &IsacProblem, v: &[Complex64], w: Complex64) -> f64 {
    problem.weighted_gain(v) * w.norm_sqr()
}

/// `log₂(1 + SNR)` in bit/s/Hz.
pub fn achievable_rate(snr: f64) -> f64 {
    snr.ln_1p() / std::f64::consts::LN_2
}

/// Hardware power consumption constants, all in mW.
///
/// These are configuration defaults chosen for this simulator; they only
/// matter through the ordering of the architectures' total consumption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PowerModel {
    pub amplifier_efficiency: f64,
    pub rf_chain_mw: f64,
    pub phase_shifter_mw: f64,
    pub dma_element_mw: f64,
    pub baseband_mw: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            amplifier_efficiency: 0.35,
            rf_chain_mw: 250.0,
            phase_shifter_mw: 30.0,
            dma_element_mw: 1.0,
            baseband_mw: 200.0,
        }
    }
}

/// Hardware inventory that drives the power model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardwareCounts {
    pub rf_chains: usize,
    pub phase_shifters: usize,
    pub dma_elements: usize,
}

impl PowerModel {
    pub fn validate(&self) -> Result<()> {
        let constants = [
            self.rf_chain_mw,
            self.phase_shifter_mw,
            self.dma_element_mw,
            self.baseband_mw,
        ];
        if constants.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::InvalidConfig(
                "power constants must be nonnegative".into(),
            ));
        }
        if !(self.amplifier_efficiency > 0.0 && self.amplifier_efficiency <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "amplifier efficiency must lie in (0, 1], got {}",
                self.amplifier_efficiency
            )));
        }
        Ok(())
    }

    pub fn total_power_mw(&self, tx_power_mw: f64, counts: HardwareCounts) -> f64 {
        tx_power_mw / self.amplifier_efficiency
            + counts.rf_chains as f64 * self.rf_chain_mw
            + counts.phase_shifters as f64 * self.phase_shifter_mw
            + counts.dma_elements as f64 * self.dma_element_mw
            + self.baseband_mw
    }
}

/// Rate over total consumed power, in bit/s/Hz per W.
pub fn energy_efficiency(
    rate: f64,
    tx_power_mw: f64,
    model: &PowerModel,
    counts: HardwareCounts,
) -> Result<f64> {
    model.validate()?;
    let total = model.total_power_mw(tx_power_mw, counts);
    if !(total > 0.0) {
        return Err(Error::InvalidConfig(
            "total power consumption is zero".into(),
        ));
    }
    Ok(rate / (total * 1e-3))
}

/// Performance summary of one transmit configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub snr: f64,
    pub rate: f64,
    pub sensing_power_mw: f64,
    pub tx_power_mw: f64,
    pub ee: f64,
}

impl Metrics {
    /// Metrics of the transmit vector `x` (already including `w`).
    pub fn of_beam(
        problem: &IsacProblem,
        x: &[Complex64],
        model: &PowerModel,
        counts: HardwareCounts,
    ) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        let snr = snr(problem, x, one);
        let rate = achievable_rate(snr);
        let tx_power_mw = energy(x);
        Ok(Self {
            snr,
            rate,
            sensing_power_mw: sensing_power(problem, x, one),
            tx_power_mw,
            ee: energy_efficiency(rate, tx_power_mw, model, counts)?,
        })
    }
}
