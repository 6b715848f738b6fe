//! Dinkelbach outer loop with the ψ and `f` subproblems solved by Riemannian
//! conjugate gradient on the product of unit circles (the "DT-Man" variant).
//!
//! For a point `x` with `|x_j| = 1`, tangent vectors satisfy `Re{x̄_j d_j} = 0`.
//! The Riemannian gradient is the Euclidean gradient `2 ∂F/∂x*` projected on
//! that tangent space, the retraction renormalizes every entry, and previous
//! search directions are transported by re-projection.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::BlockLayout;
use crate::model::{compose_effective, energy, lorentzian_map_unchecked, phase_of, IsacProblem};
use crate::optimizer::{
    analog_direction, dinkelbach_loop, quadratic_kernel, QuadraticKernel, Solution, SolverOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ManifoldOptions {
    pub max_inner_iterations: usize,
    /// Stop when `‖grad_R‖ ≤ gradient_tolerance · ‖grad_E‖`.
    pub gradient_tolerance: f64,
    pub armijo_c: f64,
    pub backtrack_ratio: f64,
    pub initial_step: f64,
    pub max_backtracks: usize,
}

impl Default for ManifoldOptions {
    fn default() -> Self {
        Self {
            max_inner_iterations: 50,
            gradient_tolerance: 1e-6,
            armijo_c: 1e-4,
            backtrack_ratio: 0.5,
            initial_step: 1.0,
            max_backtracks: 60,
        }
    }
}

/// `d − Re{d ∘ x̄} ∘ x`
pub fn project_tangent(x: &[Complex64], d: &[Complex64]) -> Vec<Complex64> {
    x.iter()
        .zip(d)
        .map(|(xj, dj)| dj - xj * (dj * xj.conj()).re)
        .collect()
}

fn real_inner(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

fn retract(x: &[Complex64], d: &[Complex64], step: f64) -> Vec<Complex64> {
    x.iter()
        .zip(d)
        .map(|(xj, dj)| phase_of(xj + dj * step, *xj))
        .collect()
}

/// Armijo backtracking along `d`; `None` if no admissible step was found.
fn armijo<F>(
    x: &[Complex64],
    value: f64,
    d: &[Complex64],
    slope: f64,
    first_step: f64,
    objective: &F,
    opts: &ManifoldOptions,
) -> Option<(Vec<Complex64>, f64)>
where
    F: Fn(&[Complex64]) -> f64,
{
    let mut step = first_step;
    for _ in 0..=opts.max_backtracks {
        let candidate = retract(x, d, step);
        let v = objective(&candidate);
        if v >= value + opts.armijo_c * step * slope {
            return Some((candidate, v));
        }
        step *= opts.backtrack_ratio;
    }
    None
}

/// Maximizes `objective` over unit-modulus vectors starting from `x`, with
/// Polak-Ribière (restarted at zero) conjugate directions and Armijo steps.
/// After the first iteration the trial step is `2 ΔF / slope`, capped at
/// `initial_step`.
/// `euclidean_gradient` must return `2 ∂F/∂x*`. Never decreases the objective.
pub fn maximize_on_circles<F, G>(
    x: &mut Vec<Complex64>,
    objective: F,
    euclidean_gradient: G,
    opts: &ManifoldOptions,
) -> f64
where
    F: Fn(&[Complex64]) -> f64,
    G: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let mut value = objective(x);
    let egrad = euclidean_gradient(x);
    let mut grad = project_tangent(x, &egrad);
    let mut grad_sq = energy(&grad);
    let mut scale = energy(&egrad).sqrt();
    let mut dir = grad.clone();
    let mut gain: Option<f64> = None;

    for _ in 0..opts.max_inner_iterations {
        if grad_sq.sqrt() <= opts.gradient_tolerance * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        let mut slope = real_inner(&grad, &dir);
        if slope <= 0.0 {
            dir = grad.clone();
            slope = grad_sq;
        }
        let trial = |slope: f64| match gain {
            Some(g) if g > 0.0 && slope > 0.0 => (2.02 * g / slope).min(opts.initial_step),
            _ => opts.initial_step,
        };
        let step = armijo(x, value, &dir, slope, trial(slope), &objective, opts).or_else(|| {
            // steepest-ascent fallback
            armijo(x, value, &grad, grad_sq, trial(grad_sq), &objective, opts)
        });
        let Some((next, next_value)) = step else {
            break;
        };
        if next_value < value {
            break;
        }
        *x = next;
        gain = Some(next_value - value);
        value = next_value;

        let egrad = euclidean_gradient(x);
        scale = energy(&egrad).sqrt();
        let next_grad = project_tangent(x, &egrad);
        let moved_grad = project_tangent(x, &grad);
        let next_sq = energy(&next_grad);
        let beta = if grad_sq > 0.0 {
            ((next_sq - real_inner(&next_grad, &moved_grad)) / grad_sq).max(0.0)
        } else {
            0.0
        };
        let moved_dir = project_tangent(x, &dir);
        dir = next_grad
            .iter()
            .zip(&moved_dir)
            .map(|(g, d)| g + d * beta)
            .collect();
        grad = next_grad;
        grad_sq = next_sq;
    }
    value
}

fn psi_subproblem(
    psi: &mut Vec<Complex64>,
    kernel: &QuadraticKernel,
    q: &[Complex64],
    z: f64,
    opts: &ManifoldOptions,
) {
    // F(ψ) = mᴴ(A − zI)m with m = q ∘ (i + ψ)/2, so 2∂F/∂ψ* = q* ∘ (A − zI)m
    let objective = |psi: &[Complex64]| {
        let m = lorentzian_map_unchecked(psi, q);
        kernel.quadratic_form(&m) - z * energy(&m)
    };
    let gradient = |psi: &[Complex64]| {
        let m = lorentzian_map_unchecked(psi, q);
        let am = kernel.apply(&m);
        q.iter()
            .zip(am.iter().zip(&m))
            .map(|(qj, (a, mj))| qj.conj() * (a - mj * z))
            .collect()
    };
    maximize_on_circles(psi, objective, gradient, opts);
}

fn analog_subproblem(
    f: &mut Vec<Complex64>,
    m: &[Complex64],
    problem: &IsacProblem,
    layout: BlockLayout,
    opts: &ManifoldOptions,
) {
    let objective = |f: &[Complex64]| {
        compose_effective(m, f, layout)
            .map(|v| problem.weighted_gain(&v))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let gradient = |f: &[Complex64]| {
        analog_direction(f, m, problem, layout)
            .map(|r| r.into_iter().map(|x| x * 2.0).collect())
            .unwrap_or_else(|_| vec![Complex64::new(0.0, 0.0); f.len()])
    };
    maximize_on_circles(f, objective, gradient, opts);
}

/// Same Dinkelbach iteration as [`crate::optimizer::solve`], with both
/// subproblems maximized by Riemannian conjugate gradient.
pub fn solve_manifold(
    problem: &IsacProblem,
    layout: BlockLayout,
    q: &[Complex64],
    options: &SolverOptions,
    manifold: &ManifoldOptions,
) -> Result<Solution> {
    dinkelbach_loop(problem, layout, q, options, |it, z| {
        let kernel = quadratic_kernel(problem, &it.f, layout)?;
        psi_subproblem(&mut it.psi, &kernel, q, z, manifold);
        it.m = lorentzian_map_unchecked(&it.psi, q);
        analog_subproblem(&mut it.f, &it.m, problem, layout, manifold);
        Ok(())
    })
}
