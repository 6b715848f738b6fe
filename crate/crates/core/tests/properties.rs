mod common;

use common::{random_instance, random_unit, rng, Instance};
use nalgebra::DVector;
use proptest::prelude::*;
use trihybrid::baselines::{solve_fd, solve_hbf, ArchitectureDescriptor, ArchitectureKind};
use trihybrid::model::{
    compose_effective, energy, lorentzian_map, sensing_power, snr, transmit_power, HardwareCounts,
};
use trihybrid::optimizer::{
    dinkelbach_ratio, quadratic_kernel, solve, surrogate_gradient, update_analog, update_psi,
    GradientForm, SolverOptions,
};
use trihybrid::oracle::{
    dense_block_matrix, dense_correlation, finite_difference_gradient, hessian_unscaled,
    max_eigenvalue, min_eigenvalue, surrogate_hessian, BlockMapping,
};
use trihybrid::Complex64;

const FORMS: [GradientForm; 3] = [
    GradientForm::Wirtinger,
    GradientForm::Printed,
    GradientForm::Tight,
];

fn rotate(v: &[Complex64], theta: f64) -> Vec<Complex64> {
    let r = Complex64::from_polar(1.0, theta);
    v.iter().map(|x| x * r).collect()
}

/// `mᴴ(A − zI)m` with `A` built for analog weights `f`.
fn p4_objective(inst: &Instance, psi: &[Complex64], f: &[Complex64], z: f64) -> f64 {
    let m = lorentzian_map(psi, &inst.gains).unwrap();
    let v = compose_effective(&m, f, inst.layout).unwrap();
    inst.problem.weighted_gain(&v) - z * energy(&m)
}

fn state(inst: &Instance, seed: u64) -> (Vec<Complex64>, Vec<Complex64>, f64) {
    let mut r = rng(seed ^ 0x5eed);
    let psi = random_unit(&mut r, inst.layout.n_elements());
    let f = random_unit(&mut r, inst.layout.n_waveguides);
    let m = lorentzian_map(&psi, &inst.gains).unwrap();
    let z = dinkelbach_ratio(&inst.problem, &m, &f, inst.layout)
        .unwrap()
        .max(1e-15);
    (psi, f, z)
}

fn hbf_descriptor(n: usize) -> ArchitectureDescriptor {
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn updates_stay_unit_modulus(seed in any::<u64>()) {
        let inst = random_instance(seed, 32);
        let (psi, f, z) = state(&inst, seed);
        let kernel = quadratic_kernel(&inst.problem, &f, inst.layout).unwrap();
        for form in FORMS {
            let next = update_psi(&psi, &kernel, &inst.gains, z, form);
            let m = lorentzian_map(&next, &inst.gains).unwrap();
            let next_f = update_analog(&f, &m, &inst.problem, inst.layout).unwrap();
            for x in next.iter().chain(&next_f) {
                prop_assert!((x.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weights_lie_on_the_lorentzian_circle(seed in any::<u64>()) {
        let inst = random_instance(seed, 32);
        let (psi, _, _) = state(&inst, seed);
        let m = lorentzian_map(&psi, &inst.gains).unwrap();
        for (mj, qj) in m.iter().zip(&inst.gains) {
            prop_assert!(((mj / qj) - Complex64::new(0.0, 0.5)).norm() - 0.5 < 1e-12);
            prop_assert!(((mj / qj) - Complex64::new(0.0, 0.5)).norm() - 0.5 > -1e-12);
        }
    }

    #[test]
    fn transmit_power_matches_dense_norm(seed in any::<u64>(), w_re in -3.0..3.0f64, w_im in -3.0..3.0f64) {
        let inst = random_instance(seed, 32);
        let (psi, f, _) = state(&inst, seed);
        let m = lorentzian_map(&psi, &inst.gains).unwrap();
        let w = Complex64::new(w_re, w_im);
        let dense = dense_block_matrix(&m, inst.layout, BlockMapping::Contiguous);
        let x = dense * DVector::from_column_slice(&f) * w;
        let p = transmit_power(&m, &f, w).unwrap();
        prop_assert!((p - x.norm_squared()).abs() <= 1e-12 * p.max(1e-300));
    }

    #[test]
    fn metrics_match_dense_evaluation(seed in any::<u64>()) {
        let inst = random_instance(seed, 32);
        let (psi, f, _) = state(&inst, seed);
        let m = lorentzian_map(&psi, &inst.gains).unwrap();
        let w = Complex64::from_polar(1.7, 0.3);
        let dense = dense_block_matrix(&m, inst.layout, BlockMapping::Contiguous);
        let x = dense * DVector::from_column_slice(&f) * w;
        let v = compose_effective(&m, &f, inst.layout).unwrap();
        let h = DVector::from_column_slice(&inst.problem.comm_channel);
        let g = DVector::from_column_slice(&inst.problem.sensing_steering);
        let s_dense = h.dotc(&x).norm_sqr();
        let p_dense = g.dotc(&x).norm_sqr();
        prop_assert!((snr(&inst.problem, &v, w) - s_dense).abs() <= 1e-12 * s_dense.max(1e-300));
        prop_assert!((sensing_power(&inst.problem, &v, w) - p_dense).abs() <= 1e-12 * p_dense.max(1e-300));
    }

    #[test]
    fn snr_ignores_global_phase(seed in any::<u64>(), theta in 0.0..std::f64::consts::TAU) {
        let mut inst = random_instance(seed, 32);
        let (psi, f, _) = state(&inst, seed);
        let m = lorentzian_map(&psi, &inst.gains).unwrap();
        let w = Complex64::new(2.0, -1.0);
        let v = compose_effective(&m, &f, inst.layout).unwrap();
        let base = snr(&inst.problem, &v, w);
        let tol = 1e-12 * base.max(1e-300);

        let vf = compose_effective(&m, &rotate(&f, theta), inst.layout).unwrap();
        prop_assert!((snr(&inst.problem, &vf, w) - base).abs() <= tol);
        prop_assert!((snr(&inst.problem, &v, w * Complex64::from_polar(1.0, theta)) - base).abs() <= tol);
        inst.problem.comm_channel = rotate(&inst.problem.comm_channel, theta);
        prop_assert!((snr(&inst.problem, &v, w) - base).abs() <= tol);
    }

    #[test]
    fn psi_update_never_decreases_the_subproblem(seed in any::<u64>()) {
        let inst = random_instance(seed, 32);
        let (psi, f, z) = state(&inst, seed);
        let kernel = quadratic_kernel(&inst.problem, &f, inst.layout).unwrap();
        let before = p4_objective(&inst, &psi, &f, z);
        for form in FORMS {
            let next = update_psi(&psi, &kernel, &inst.gains, z, form);
            let after = p4_objective(&inst, &next, &f, z);
            prop_assert!(after >= before - 1e-10 * before.abs().max(z * energy(&inst.gains)), "{:?}: {} -> {}", form, before, after);
        }
    }

    #[test]
    fn analog_update_never_decreases_the_gain(seed in any::<u64>()) {
        let inst = random_instance(seed, 32);
        let (psi, f, _) = state(&inst, seed);
        let m = lorentzian_map(&psi, &inst.gains).unwrap();
        let gain = |f: &[Complex64]| inst.problem.weighted_gain(&compose_effective(&m, f, inst.layout).unwrap());
        let next = update_analog(&f, &m, &inst.problem, inst.layout).unwrap();
        prop_assert!(gain(&next) >= gain(&f) * (1.0 - 1e-12));
    }

    #[test]
    fn surrogate_hessians_are_positive_definite(seed in any::<u64>(), z in 1e-6..1e4f64) {
        let inst = random_instance(seed, 32);
        let (_, f, _) = state(&inst, seed);
        let kernel = quadratic_kernel(&inst.problem, &f, inst.layout).unwrap();
        prop_assert!(min_eigenvalue(&hessian_unscaled(&kernel, &inst.gains, z)) > 0.0);
        prop_assert!(min_eigenvalue(&surrogate_hessian(&kernel, &inst.gains, z)) > 0.0);
    }

    #[test]
    fn fd_eigenvalue_matches_dense_decomposition(seed in any::<u64>()) {
        let inst = random_instance(seed, 32);
        let fd = solve_fd(&inst.problem).unwrap();
        let dense = max_eigenvalue(&dense_correlation(&inst.problem));
        prop_assert!((fd.eigenvalue - dense).abs() <= 1e-10 * dense);
        prop_assert!((energy(&fd.precoder) - inst.problem.power_budget).abs() <= 1e-12 * inst.problem.power_budget);
        prop_assert!((fd.objective - inst.problem.power_budget * dense).abs() <= 1e-10 * fd.objective);
    }

    #[test]
    fn hbf_objective_is_monotone(seed in any::<u64>()) {
        let inst = random_instance(seed, 32);
        let n = inst.problem.n_elements();
        let sol = solve_hbf(&inst.problem, &hbf_descriptor(n), &SolverOptions::default().with_seed(seed)).unwrap();
        for w in sol.objective_trace.windows(2) {
            prop_assert!(w[1] >= w[0] * (1.0 - 1e-12));
        }
        prop_assert!((energy(&sol.transmit_beam()) - inst.problem.power_budget).abs() <= 1e-9 * inst.problem.power_budget);
    }

    #[test]
    fn solver_trace_is_monotone(seed in any::<u64>()) {
        let inst = random_instance(seed, 32);
        for form in FORMS {
            let opts = SolverOptions { gradient: form, ..SolverOptions::default() }.with_seed(seed);
            let sol = solve(&inst.problem, inst.layout, &inst.gains, &opts).unwrap();
            let ratios: Vec<f64> = sol.trace.ratios().collect();
            for w in ratios.windows(2) {
                prop_assert!(w[1] >= w[0] * (1.0 - 1e-12), "{:?}: {} -> {}", form, w[0], w[1]);
            }
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    for seed in 0..20 {
        let inst = random_instance(seed, 8);
        let (_, f, z) = state(&inst, seed);
        let kernel = quadratic_kernel(&inst.problem, &f, inst.layout).unwrap();
        let mut r = rng(seed);
        let psi = common::random_complex(&mut r, inst.layout.n_elements());
        let q = &inst.gains;
        let tight: Vec<f64> = q.iter().map(|x| 0.25 * z * x.norm_sqr()).collect();
        let objective = |form: GradientForm, x: &[Complex64]| {
            let m: Vec<Complex64> = x
                .iter()
                .zip(q)
                .map(|(p, qj)| qj * (Complex64::i() + p) * 0.5)
                .collect();
            let base = kernel.quadratic_form(&m) - z * energy(&m);
            match form {
                GradientForm::Wirtinger => base + z * energy(x),
                GradientForm::Printed => 2.0 * base + z * energy(x),
                GradientForm::Tight => {
                    base + x
                        .iter()
                        .zip(&tight)
                        .map(|(p, c)| c * p.norm_sqr())
                        .sum::<f64>()
                }
            }
        };
        for form in FORMS {
            let analytic = surrogate_gradient(&psi, &kernel, q, z, form);
            let numeric = finite_difference_gradient(|x| objective(form, x), &psi, 1e-5);
            let diff: f64 = analytic
                .iter()
                .zip(&numeric)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let scale = energy(&analytic).sqrt().max(1e-9);
            assert!(
                diff <= 1e-6 * scale,
                "{form:?} seed {seed}: {diff} vs {scale}"
            );
        }
    }
}

#[test]
fn single_element_matches_closed_form() {
    // with one element the ratio is |h|² for every admissible ψ
    let inst = common::sv_instance(1, 1, 1.0, 3);
    let sol = solve(
        &inst.problem,
        inst.layout,
        &inst.gains,
        &SolverOptions::default(),
    )
    .unwrap();
    let h = inst.problem.comm_channel[0].norm_sqr();
    assert!((sol.ratio - h).abs() <= 1e-12 * h);
}
