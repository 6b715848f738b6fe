//! Fully-connected single-RF-chain hybrid beamformer: one phase shifter per
//! antenna and `w = sqrt(P_t / N)`. The phases are found with the same MM
//! phase-extraction map as the tri-hybrid analog stage, `f ← exp(i∠(R f))`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{energy, IsacProblem};
use crate::optimizer::{align_phases, random_phases, SolverOptions};

use super::ArchitectureDescriptor;

#[derive(Debug, Clone, PartialEq)]
pub struct HbfSolution {
    pub phases: Vec<Complex64>,
    pub digital: Complex64,
    /// `fᴴRf` at the start and after every iteration.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

impl HbfSolution {
    pub fn transmit_beam(&self) -> Vec<Complex64> {
        self.phases.iter().map(|f| f * self.digital).collect()
    }
}

pub fn solve_hbf(
    problem: &IsacProblem,
    descriptor: &ArchitectureDescriptor,
    options: &SolverOptions,
) -> Result<HbfSolution> {
    if !descriptor.kind.is_hybrid() {
        return Err(Error::InvalidConfig(format!(
            "phase-shifter solver needs an HBF architecture, got {}",
            descriptor.kind
        )));
    }
    crate::error::check_len("HBF channel", descriptor.n_antennas, problem.n_elements())?;
    solve_phase_only(problem, options)
}

pub(crate) fn solve_phase_only(
    problem: &IsacProblem,
    options: &SolverOptions,
) -> Result<HbfSolution> {
    options.validate()?;
    let n = problem.n_elements();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut f = random_phases(&mut rng, n);
    let mut objective = problem.weighted_gain(&f);
    let mut trace = vec![objective];
    let mut converged = false;
    for _ in 0..options.max_iterations {
        let next_f = align_phases(&f, &problem.apply_correlation(&f));
        let next = problem.weighted_gain(&next_f);
        trace.push(next);
        let change = (next - objective).abs();
        if next >= objective {
            f = next_f;
        }
        objective = objective.max(next);
        if change <= options.rel_tolerance * objective.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    let digital = Complex64::new((problem.power_budget / energy(&f)).sqrt(), 0.0);
    Ok(HbfSolution {
        phases: f,
        digital,
        objective_trace: trace,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::ArchitectureKind;
    use crate::model::{inner, HardwareCounts};

    fn descriptor(n: usize) -> ArchitectureDescriptor {
        ArchitectureDescriptor {
            kind: ArchitectureKind::HbfSn,
            n_antennas: n,
            element_spacing: 0.005,
            counts: HardwareCounts {
                rf_chains: 1,
                phase_shifters: n,
                dma_elements: 0,
            },
        }
    }

    #[test]
    fn rank_one_fixed_point() {
        let h = vec![
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.1),
            Complex64::new(0.0, 3.0),
            Complex64::new(0.2, -0.2),
        ];
        let p = IsacProblem::new(h.clone(), h.clone(), 1.0, 0.0, 10.0).unwrap();
        let sol = solve_hbf(&p, &descriptor(4), &SolverOptions::default()).unwrap();
        assert!(sol.converged);
        let snr = inner(&h, &sol.transmit_beam()).norm_sqr();
        let sum_abs: f64 = h.iter().map(|x| x.norm()).sum();
        let expected = 10.0 * sum_abs * sum_abs / 4.0;
        assert!((snr - expected).abs() < 1e-10 * expected);
        assert!((energy(&sol.transmit_beam()) - 10.0).abs() < 1e-9 * 10.0);
    }

    #[test]
    fn single_antenna() {
        let h = vec![Complex64::new(0.3, -0.4)];
        let p = IsacProblem::new(h.clone(), h.clone(), 1.0, 0.0, 10.0).unwrap();
        let sol = solve_hbf(&p, &descriptor(1), &SolverOptions::default()).unwrap();
        let snr = inner(&h, &sol.transmit_beam()).norm_sqr();
        assert!((snr - 10.0 * 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_other_architectures() {
        let h = vec![Complex64::new(1.0, 0.0)];
        let p = IsacProblem::new(h.clone(), h, 1.0, 0.0, 1.0).unwrap();
        let mut d = descriptor(1);
        d.kind = ArchitectureKind::FdSn;
        assert!(solve_hbf(&p, &d, &SolverOptions::default()).is_err());
        assert!(solve_hbf(&p, &descriptor(2), &SolverOptions::default()).is_err());
    }
}
