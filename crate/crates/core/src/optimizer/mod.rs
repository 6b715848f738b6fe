//! Joint DMA/analog/digital beamformer design.
//!
//! Substituting the optimal digital power `|w|² = P_t / Σ|m_j|²` turns the
//! weighted objective into the single ratio
//!
//! ```text
//!   (δ_c |hᴴMf|² + δ_s |gᴴMf|²) / Σ|m_j|²
//! ```
//!
//! which [`solve`] maximizes with a Dinkelbach outer loop. Each outer step
//! freezes `z` at the current ratio and performs one majorization step on the
//! Lorentzian phases ψ followed by one on the analog phases `f`. Both steps
//! are closed-form phase extractions, so an iteration costs O(N_r).

mod kernel;
mod record;

pub use kernel::{
    align_phases, analog_direction, dinkelbach_ratio, lift_blockdiag, optimal_digital_weight,
    quadratic_kernel, surrogate_gradient, surrogate_value, update_analog, update_psi, BlockLifting,
    GradientForm, QuadraticKernel,
};
pub use record::SolutionRecord;

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clock::Stopwatch;
use crate::error::{check_len, Error, Result};
use crate::geometry::BlockLayout;
use crate::model::{
    compose_effective, lorentzian_map_unchecked, AnalogBeamformer, DigitalWeight, DmaState,
    HardwareCounts, IsacProblem, Metrics, PowerModel,
};

/// Lower clamp on the Dinkelbach parameter, keeps the ψ surrogate strictly convex.
pub const MIN_DINKELBACH_PARAMETER: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop once the ratio objective changes by less than this, relatively.
    pub rel_tolerance: f64,
    /// Seed of the random feasible starting point.
    pub seed: u64,
    pub gradient: GradientForm,
    /// ψ/f update pairs performed per refresh of `z`.
    pub inner_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            rel_tolerance: 1e-6,
            seed: 0,
            gradient: GradientForm::Wirtinger,
            inner_sweeps: 1,
        }
    }
}

impl SolverOptions {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.rel_tolerance
            )));
        }
        if self.max_iterations == 0 || self.inner_sweeps == 0 {
            return Err(Error::InvalidConfig(
                "iteration counts must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Dinkelbach parameter used during this iteration.
    pub z: f64,
    /// Ratio objective after the iteration's updates.
    pub ratio: f64,
    /// Weighted objective after scaling `w` onto the power budget.
    pub p1_objective: f64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub initial_ratio: f64,
    pub records: Vec<IterationRecord>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Ratio values including the starting point.
    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.initial_ratio).chain(self.records.iter().map(|r| r.ratio))
    }

    /// Whether no ratio drops by more than `slack` from one iteration to the next.
    pub fn is_monotone(&self, slack: f64) -> bool {
        let ratios: Vec<f64> = self.ratios().collect();
        ratios.windows(2).all(|w| w[1] >= w[0] - slack)
    }

    /// CSV with header `iteration,z,ratio_objective,p1_objective,elapsed_ms`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record([
            "iteration",
            "z",
            "ratio_objective",
            "p1_objective",
            "elapsed_ms",
        ])?;
        for r in &self.records {
            writer.write_record([
                r.iteration.to_string(),
                crate::harness::format_float(r.z),
                crate::harness::format_float(r.ratio),
                crate::harness::format_float(r.p1_objective),
                crate::harness::format_float(r.elapsed_ms),
            ])?;
        }
        writer.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub digital: DigitalWeight,
    pub analog: AnalogBeamformer,
    pub dma: DmaState,
    pub trace: IterationTrace,
    pub converged: bool,
    /// Final ratio objective.
    pub ratio: f64,
    /// Dinkelbach parameter of the last iteration.
    pub final_z: f64,
}

impl Solution {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    /// `M f`
    pub fn effective(&self, layout: BlockLayout) -> Result<Vec<Complex64>> {
        compose_effective(self.dma.weights(), self.analog.weights(), layout)
    }

    /// `M f w`
    pub fn transmit_beam(&self, layout: BlockLayout) -> Result<Vec<Complex64>> {
        let w = self.digital.value;
        Ok(self.effective(layout)?.into_iter().map(|v| v * w).collect())
    }

    pub fn metrics(
        &self,
        problem: &IsacProblem,
        layout: BlockLayout,
        model: &PowerModel,
        counts: HardwareCounts,
    ) -> Result<Metrics> {
        Metrics::of_beam(problem, &self.transmit_beam(layout)?, model, counts)
    }

    /// `numerator − z · denominator` at the returned point.
    pub fn dinkelbach_residual(&self, problem: &IsacProblem, layout: BlockLayout) -> Result<f64> {
        let v = self.effective(layout)?;
        Ok(problem.weighted_gain(&v) - self.final_z * self.dma.energy())
    }
}

/// Uniform random phases on `[0, 2π)`.
pub fn random_phases<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..TAU)))
        .collect()
}

/// Seeded feasible starting point `(ψ⁰, f⁰)`.
pub fn initial_point(layout: BlockLayout, seed: u64) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = random_phases(&mut rng, layout.n_elements());
    let f = random_phases(&mut rng, layout.n_waveguides);
    (psi, f)
}

/// Mutable iterate shared by the Dinkelbach loop and its inner updates.
pub(crate) struct Iterate {
    pub psi: Vec<Complex64>,
    pub m: Vec<Complex64>,
    pub f: Vec<Complex64>,
}

/// Dinkelbach outer loop. `inner` must not decrease
/// `δ_c|hᴴMf|² + δ_s|gᴴMf|² − z Σ|m_j|²` for the supplied `z`.
pub(crate) fn dinkelbach_loop<F>(
    problem: &IsacProblem,
    layout: BlockLayout,
    q: &[Complex64],
    options: &SolverOptions,
    mut inner: F,
) -> Result<Solution>
where
    F: FnMut(&mut Iterate, f64) -> Result<()>,
{
    options.validate()?;
    check_len("channel", layout.n_elements(), problem.n_elements())?;
    check_len("propagation gains", layout.n_elements(), q.len())?;

    let clock = Stopwatch::start();
    let (psi, f) = initial_point(layout, options.seed);
    let m = lorentzian_map_unchecked(&psi, q);
    let mut it = Iterate { psi, m, f };
    let mut ratio = dinkelbach_ratio(problem, &it.m, &it.f, layout)?;

    let mut trace = IterationTrace {
        initial_ratio: ratio,
        records: Vec::new(),
    };
    let mut best = (ratio, it.psi.clone(), it.f.clone());
    let mut converged = false;
    let mut final_z = ratio;

    for iteration in 1..=options.max_iterations {
        let z = ratio.max(MIN_DINKELBACH_PARAMETER);
        inner(&mut it, z)?;
        let next = dinkelbach_ratio(problem, &it.m, &it.f, layout)?;
        trace.records.push(IterationRecord {
            iteration,
            z,
            ratio: next,
            p1_objective: problem.power_budget * next,
            elapsed_ms: clock.elapsed_ms(),
        });
        final_z = z;
        if next >= best.0 {
            best = (next, it.psi.clone(), it.f.clone());
        }
        let change = (next - ratio).abs();
        ratio = next;
        if change <= options.rel_tolerance * ratio.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    let (ratio, psi, f) = if converged {
        (ratio, it.psi, it.f)
    } else {
        best
    };
    let dma = DmaState::new(q.to_vec(), psi)?;
    let digital = optimal_digital_weight(dma.weights(), problem.power_budget)?;
    Ok(Solution {
        digital,
        analog: AnalogBeamformer::new(f)?,
        dma,
        trace,
        converged,
        ratio,
        final_z,
    })
}

/// Alternating Dinkelbach / closed-form MM design of `(w, f, ψ)`.
pub fn solve(
    problem: &IsacProblem,
    layout: BlockLayout,
    q: &[Complex64],
    options: &SolverOptions,
) -> Result<Solution> {
    let form = options.gradient;
    let sweeps = options.inner_sweeps;
    dinkelbach_loop(problem, layout, q, options, |it, z| {
        for _ in 0..sweeps {
            let kernel = quadratic_kernel(problem, &it.f, layout)?;
            let (psi, m) = kernel::psi_step(&it.psi, &kernel, q, z, form);
            it.psi = psi;
            it.m = m;
            it.f = update_analog(&it.f, &it.m, problem, layout)?;
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_sv_channel, SvChannelParams};
    use crate::geometry::{
        build_dma_geometry, propagation_gains, steering_vector, TargetDirection,
    };
    use crate::model::transmit_power;

    fn instance(
        nw: usize,
        nu: usize,
        dc: f64,
        seed: u64,
    ) -> (IsacProblem, BlockLayout, Vec<Complex64>) {
        let g = build_dma_geometry(nw, nu, 28e9).unwrap();
        let q = propagation_gains(&g, 0.6, 827.67).unwrap();
        let ch = sample_sv_channel(&g, &SvChannelParams::default(), seed).unwrap();
        let a = steering_vector(&g, TargetDirection::new(0.4, 1.2));
        let p = IsacProblem::new(ch.normalized_channel, a, dc, 1.0 - dc, 10.0).unwrap();
        (p, g.layout(), q)
    }

    #[test]
    fn single_element_snr_is_matched_filter() {
        let layout = BlockLayout::new(1, 1).unwrap();
        let h = vec![Complex64::new(0.3, -1.1)];
        let q = vec![Complex64::from_polar(0.9, 0.7)];
        let p = IsacProblem::new(h.clone(), h.clone(), 1.0, 0.0, 10.0).unwrap();
        let sol = solve(&p, layout, &q, &SolverOptions::default()).unwrap();
        let snr = crate::model::snr(&p, &sol.effective(layout).unwrap(), sol.digital.value);
        assert!((snr - 10.0 * h[0].norm_sqr()).abs() < 1e-9 * snr);
    }

    #[test]
    fn solution_is_feasible_and_on_budget() {
        let (p, layout, q) = instance(4, 8, 0.5, 3);
        let sol = solve(&p, layout, &q, &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        assert!(sol.trace.is_monotone(1e-9));
        let pt =
            transmit_power(sol.dma.weights(), sol.analog.weights(), sol.digital.value).unwrap();
        assert!((pt - 10.0).abs() < 1e-9 * 10.0);
        assert!(sol
            .dma
            .phases()
            .iter()
            .all(|x| (x.norm() - 1.0).abs() < 1e-12));
        assert!(sol
            .analog
            .weights()
            .iter()
            .all(|x| (x.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn deterministic_for_seed() {
        let (p, layout, q) = instance(2, 4, 0.3, 11);
        let opts = SolverOptions::default().with_seed(5);
        let a = solve(&p, layout, &q, &opts).unwrap();
        let b = solve(&p, layout, &q, &opts).unwrap();
        assert_eq!(a.dma, b.dma);
        assert_eq!(a.analog, b.analog);
        assert_eq!(a.ratio, b.ratio);
    }

    #[test]
    fn printed_gradient_also_ascends() {
        let (p, layout, q) = instance(4, 8, 0.075, 8);
        let opts = SolverOptions {
            gradient: GradientForm::Printed,
            ..Default::default()
        };
        let sol = solve(&p, layout, &q, &opts).unwrap();
        assert!(sol.trace.is_monotone(1e-9));
    }

    #[test]
    fn iteration_cap_flags_non_convergence() {
        let (p, layout, q) = instance(4, 8, 0.5, 2);
        let opts = SolverOptions {
            max_iterations: 1,
            rel_tolerance: 1e-300,
            ..Default::default()
        };
        let sol = solve(&p, layout, &q, &opts).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations(), 1);
    }

    #[test]
    fn rejects_bad_options_and_shapes() {
        let (p, layout, q) = instance(2, 2, 0.5, 0);
        let bad = SolverOptions {
            rel_tolerance: 0.0,
            ..Default::default()
        };
        assert!(solve(&p, layout, &q, &bad).is_err());
        assert!(solve(&p, layout, &q[..3], &SolverOptions::default()).is_err());
    }

    #[test]
    fn trace_csv_header() {
        let (p, layout, q) = instance(2, 2, 0.5, 0);
        let sol = solve(&p, layout, &q, &SolverOptions::default()).unwrap();
        let mut buf = Vec::new();
        sol.trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("iteration,z,ratio_objective,p1_objective,elapsed_ms")
        );
        assert_eq!(lines.count(), sol.iterations());
    }
}
