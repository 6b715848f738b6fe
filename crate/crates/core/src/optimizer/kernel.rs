//! Closed-form building blocks of the alternating Dinkelbach/MM iteration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::BlockLayout;
use crate::model::{
    compose_effective, energy, inner, lorentzian_map_unchecked, phase_of, DigitalWeight,
    IsacProblem,
};

/// `w = sqrt(P_t / Σ|m_j|²)`, real and nonnegative.
pub fn optimal_digital_weight(m: &[Complex64], power_budget: f64) -> Result<DigitalWeight> {
    let e = energy(m);
    if !(e > 0.0) {
        return Err(Error::DegenerateBeamformer);
    }
    Ok(DigitalWeight {
        value: Complex64::new((power_budget / e).sqrt(), 0.0),
    })
}

/// `z = (δ_c|hᴴMf|² + δ_s|gᴴMf|²) / Σ|m_j|²`.
pub fn dinkelbach_ratio(
    problem: &IsacProblem,
    m: &[Complex64],
    f: &[Complex64],
    layout: BlockLayout,
) -> Result<f64> {
    let v = compose_effective(m, f, layout)?;
    let den = energy(m);
    if !(den > 0.0) {
        return Err(Error::DegenerateBeamformer);
    }
    Ok(problem.weighted_gain(&v) / den)
}

/// Block-diagonal lifting `X = blkdiag(x_1, …, x_{N_w})` of an `N_r` vector,
/// an `N_r × N_w` matrix kept as its diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockLifting {
    data: Vec<Complex64>,
    layout: BlockLayout,
}

pub fn lift_blockdiag(x: &[Complex64], layout: BlockLayout) -> Result<BlockLifting> {
    check_len("lifted vector", layout.n_elements(), x.len())?;
    Ok(BlockLifting {
        data: x.to_vec(),
        layout,
    })
}

impl BlockLifting {
    pub fn layout(&self) -> BlockLayout {
        self.layout
    }

    pub fn block(&self, waveguide: usize) -> &[Complex64] {
        &self.data[self.layout.block(waveguide)]
    }

    /// `X f*`, an `N_r` vector with entries `x_j conj(f_{waveguide(j)})`.
    pub fn times_conj(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("analog weights", self.layout.n_waveguides, f.len())?;
        let mut out = Vec::with_capacity(self.data.len());
        for (i, fi) in f.iter().enumerate() {
            let fc = fi.conj();
            out.extend(self.block(i).iter().map(|x| x * fc));
        }
        Ok(out)
    }
}

/// The rank-2 Hermitian PSD kernel `A = δ_c a_h a_hᴴ + δ_s a_g a_gᴴ` with
/// `a_h = H f*`, `a_g = G f*`, so that `mᴴ A m = δ_c|hᴴMf|² + δ_s|gᴴMf|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticKernel {
    pub comm_factor: Vec<Complex64>,
    pub sense_factor: Vec<Complex64>,
    pub weight_comm: f64,
    pub weight_sense: f64,
}

pub fn quadratic_kernel(
    problem: &IsacProblem,
    f: &[Complex64],
    layout: BlockLayout,
) -> Result<QuadraticKernel> {
    Ok(QuadraticKernel {
        comm_factor: lift_blockdiag(&problem.comm_channel, layout)?.times_conj(f)?,
        sense_factor: lift_blockdiag(&problem.sensing_steering, layout)?.times_conj(f)?,
        weight_comm: problem.weight_comm,
        weight_sense: problem.weight_sense,
    })
}

impl QuadraticKernel {
    pub fn len(&self) -> usize {
        self.comm_factor.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comm_factor.is_empty()
    }

    pub fn apply(&self, m: &[Complex64]) -> Vec<Complex64> {
        let ch = inner(&self.comm_factor, m) * self.weight_comm;
        let cg = inner(&self.sense_factor, m) * self.weight_sense;
        self.comm_factor
            .iter()
            .zip(&self.sense_factor)
            .map(|(a, b)| a * ch + b * cg)
            .collect()
    }

    pub fn quadratic_form(&self, m: &[Complex64]) -> f64 {
        self.weight_comm * inner(&self.comm_factor, m).norm_sqr()
            + self.weight_sense * inner(&self.sense_factor, m).norm_sqr()
    }
}

/// Which expression is used as the ascent direction of the ψ surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientForm {
    /// `2 ∂f/∂ψ* = q* ∘ (A − zI) m + 2zψ`, the exact Wirtinger gradient of
    /// `f(ψ) = mᴴAm − z mᴴm + z ψᴴψ`.
    #[default]
    Wirtinger,
    /// `(2Am − 2zm) ∘ q* + 2zψ`. This is the exact gradient of the convex
    /// function `2 mᴴ(A − zI)m + z ψᴴψ`, so it is also a valid MM direction.
    Printed,
    /// Smallest per-element convexifying weights: `q* ∘ (A − zI) m + 2c ∘ ψ`
    /// with `c_j = z|q_j|²/4`, the gradient of `mᴴ(A − zI)m + Σ c_j|ψ_j|²`.
    Tight,
}

/// The convexified ψ-subproblem objective `mᴴAm − z mᴴm + z ψᴴψ`,
/// evaluated for arbitrary (not necessarily unit-modulus) ψ.
pub fn surrogate_value(
    psi: &[Complex64],
    kernel: &QuadraticKernel,
    q: &[Complex64],
    z: f64,
) -> f64 {
    let m = lorentzian_raw(psi, q);
    kernel.quadratic_form(&m) - z * energy(&m) + z * energy(psi)
}

/// `m = q ∘ (i + ψ) / 2` without renormalizing ψ.
pub(crate) fn lorentzian_raw(psi: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    psi.iter()
        .zip(q)
        .map(|(p, qj)| qj * (Complex64::i() + p) * 0.5)
        .collect()
}

pub fn surrogate_gradient(
    psi: &[Complex64],
    kernel: &QuadraticKernel,
    q: &[Complex64],
    z: f64,
    form: GradientForm,
) -> Vec<Complex64> {
    let m = lorentzian_raw(psi, q);
    let am = kernel.apply(&m);
    if form == GradientForm::Tight {
        return psi
            .iter()
            .zip(q)
            .zip(am.iter().zip(&m))
            .map(|((p, qj), (a, mj))| qj.conj() * (a - mj * z) + p * (0.5 * z * qj.norm_sqr()))
            .collect();
    }
    let scale = match form {
        GradientForm::Printed => 2.0,
        _ => 1.0,
    };
    psi.iter()
        .zip(q)
        .zip(am.iter().zip(&m))
        .map(|((p, qj), (a, mj))| qj.conj() * (a - mj * z) * scale + p * (2.0 * z))
        .collect()
}

/// Unit-modulus maximizer of `Re{xᴴ d}`: the phases of `d`, keeping the
/// previous entry wherever `d` vanishes.
pub fn align_phases(previous: &[Complex64], direction: &[Complex64]) -> Vec<Complex64> {
    previous
        .iter()
        .zip(direction)
        .map(|(p, d)| phase_of(*d, *p))
        .collect()
}

/// One MM step on the DMA phases: `ψ' = exp(i∠∇f(ψ))`.
pub fn update_psi(
    psi: &[Complex64],
    kernel: &QuadraticKernel,
    q: &[Complex64],
    z: f64,
    form: GradientForm,
) -> Vec<Complex64> {
    align_phases(psi, &surrogate_gradient(psi, kernel, q, z, form))
}

/// `r = Mᴴ(δ_c hhᴴ + δ_s ggᴴ)M f`, computed blockwise in O(N_r).
pub fn analog_direction(
    f: &[Complex64],
    m: &[Complex64],
    problem: &IsacProblem,
    layout: BlockLayout,
) -> Result<Vec<Complex64>> {
    let v = compose_effective(m, f, layout)?;
    let u = problem.apply_correlation(&v);
    Ok((0..layout.n_waveguides)
        .map(|i| {
            let block = layout.block(i);
            m[block.clone()]
                .iter()
                .zip(&u[block])
                .map(|(mj, uj)| mj.conj() * uj)
                .sum()
        })
        .collect())
}

/// One MM step on the analog phases: `f' = exp(i∠(Mᴴ R M f))`.
pub fn update_analog(
    f: &[Complex64],
    m: &[Complex64],
    problem: &IsacProblem,
    layout: BlockLayout,
) -> Result<Vec<Complex64>> {
    Ok(align_phases(f, &analog_direction(f, m, problem, layout)?))
}

/// ψ update followed by the matching DMA weights.
pub(crate) fn psi_step(
    psi: &[Complex64],
    kernel: &QuadraticKernel,
    q: &[Complex64],
    z: f64,
    form: GradientForm,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let next = update_psi(psi, kernel, q, z, form);
    let m = lorentzian_map_unchecked(&next, q);
    (next, m)
}
