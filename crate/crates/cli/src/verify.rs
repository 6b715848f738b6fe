//! Cross-checks of the fast solver paths against dense and brute-force
//! reference computations on harness-generated instances.

use anyhow::{bail, Result};
use clap::Args;
use trihybrid::baselines::{solve_fd, ArchitectureKind};
use trihybrid::harness::{build_instance, ScenarioConfig, ScenarioInstance};
use trihybrid::model::{energy, lorentzian_map};
use trihybrid::optimizer::{
    dinkelbach_ratio, initial_point, quadratic_kernel, solve, surrogate_gradient, surrogate_value,
    GradientForm, SolverOptions,
};
use trihybrid::oracle::{
    dense_correlation, dense_model_check, exhaustive_phase_search, finite_difference_gradient,
    max_eigenvalue, min_eigenvalue, surrogate_hessian, GridSearchSpec,
};
use trihybrid::Complex64;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Realizations per check.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// Phase levels of the brute-force grid.
    #[arg(long, default_value_t = 16)]
    pub grid_levels: usize,
    #[arg(long, default_value_t = 1)]
    pub base_seed: u64,
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

const WEIGHTS: [f64; 3] = [0.075, 0.5, 1.0];

fn instance(n_w: usize, n_u: usize, seed: u64) -> Result<ScenarioInstance> {
    let config = ScenarioConfig {
        n_waveguides: n_w,
        elements_per_waveguide: n_u,
        ..ScenarioConfig::default()
    };
    let delta_c = WEIGHTS[(seed % 3) as usize];
    Ok(build_instance(
        &config,
        ArchitectureKind::TriHybrid,
        seed,
        delta_c,
    )?)
}

fn seeds(args: &VerifyArgs) -> impl Iterator<Item = u64> {
    args.base_seed..args.base_seed + args.seeds
}

fn gradient_check(args: &VerifyArgs) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for seed in seeds(args) {
        let inst = instance(2, 4, seed)?;
        let layout = inst.geometry.layout();
        let (psi, f) = initial_point(layout, seed);
        let m = lorentzian_map(&psi, &inst.gains)?;
        let z = dinkelbach_ratio(&inst.problem, &m, &f, layout)?;
        let kernel = quadratic_kernel(&inst.problem, &f, layout)?;
        // off the unit circle so the check covers the full complex gradient
        let probe: Vec<Complex64> = psi.iter().map(|p| p * 0.7).collect();
        let analytic = surrogate_gradient(&probe, &kernel, &inst.gains, z, GradientForm::Wirtinger);
        let numeric = finite_difference_gradient(
            |x| surrogate_value(x, &kernel, &inst.gains, z),
            &probe,
            1e-6,
        );
        let diff: f64 = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(diff / energy(&analytic).sqrt().max(f64::MIN_POSITIVE));
    }
    Ok(Check {
        name: "surrogate gradient vs finite differences",
        pass: worst <= 1e-6,
        detail: format!("max relative error {worst:.2e}"),
    })
}

fn model_check(args: &VerifyArgs) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for seed in seeds(args) {
        let inst = instance(4, 8, seed)?;
        let layout = inst.geometry.layout();
        let (psi, f) = initial_point(layout, seed);
        let m = lorentzian_map(&psi, &inst.gains)?;
        let residuals = dense_model_check(&m, &f, &inst.problem, layout)?;
        let scale = energy(&inst.problem.comm_channel) + energy(&inst.problem.sensing_steering);
        worst = worst.max(residuals.max() / scale.max(1.0));
    }
    Ok(Check {
        name: "implicit model vs dense matrices",
        pass: worst <= 1e-10,
        detail: format!("max scaled residual {worst:.2e}"),
    })
}

fn constraint_check(args: &VerifyArgs) -> Result<Check> {
    let mut modulus: f64 = 0.0;
    let mut circle: f64 = 0.0;
    let mut power: f64 = 0.0;
    for seed in seeds(args) {
        let inst = instance(4, 8, seed)?;
        let layout = inst.geometry.layout();
        let sol = solve(
            &inst.problem,
            layout,
            &inst.gains,
            &SolverOptions::default().with_seed(seed),
        )?;
        for x in sol.dma.phases().iter().chain(sol.analog.weights()) {
            modulus = modulus.max((x.norm() - 1.0).abs());
        }
        for (mj, qj) in sol.dma.weights().iter().zip(&inst.gains) {
            circle = circle.max(((mj / qj) - Complex64::new(0.0, 0.5)).norm() - 0.5);
        }
        let beam = sol.transmit_beam(layout)?;
        let budget = inst.problem.power_budget;
        power = power.max((energy(&beam) - budget).abs() / budget);
    }
    let worst = modulus.max(circle.abs()).max(power);
    Ok(Check {
        name: "unit modulus, Lorentzian circle, power budget",
        pass: worst <= 1e-10,
        detail: format!("modulus {modulus:.1e}, circle {circle:.1e}, power {power:.1e}"),
    })
}

fn hessian_check(args: &VerifyArgs) -> Result<Check> {
    let mut smallest = f64::INFINITY;
    for seed in seeds(args) {
        let inst = instance(2, 8, seed)?;
        let layout = inst.geometry.layout();
        let (psi, f) = initial_point(layout, seed);
        let m = lorentzian_map(&psi, &inst.gains)?;
        let z = dinkelbach_ratio(&inst.problem, &m, &f, layout)?;
        let kernel = quadratic_kernel(&inst.problem, &f, layout)?;
        smallest = smallest.min(min_eigenvalue(&surrogate_hessian(&kernel, &inst.gains, z)));
    }
    Ok(Check {
        name: "surrogate Hessian positive definite",
        pass: smallest > 0.0,
        detail: format!("smallest eigenvalue {smallest:.3e}"),
    })
}

fn fd_check(args: &VerifyArgs) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for seed in seeds(args) {
        let inst = instance(4, 8, seed)?;
        let fd = solve_fd(&inst.problem)?;
        let dense = max_eigenvalue(&dense_correlation(&inst.problem));
        worst = worst.max((fd.eigenvalue - dense).abs() / dense);
    }
    Ok(Check {
        name: "fully-digital eigenvalue vs dense decomposition",
        pass: worst <= 1e-10,
        detail: format!("max relative error {worst:.2e}"),
    })
}

fn grid_check(args: &VerifyArgs) -> Result<Check> {
    let spec = GridSearchSpec::new(args.grid_levels);
    let mut good = 0;
    let mut worst = f64::INFINITY;
    for seed in seeds(args) {
        let inst = instance(2, 2, seed)?;
        let layout = inst.geometry.layout();
        let sol = solve(
            &inst.problem,
            layout,
            &inst.gains,
            &SolverOptions::default().with_seed(seed),
        )?;
        let grid = exhaustive_phase_search(&inst.problem, layout, &inst.gains, &spec)?;
        let fraction = sol.ratio / grid.ratio;
        worst = worst.min(fraction);
        if fraction >= 0.9 {
            good += 1;
        }
    }
    Ok(Check {
        name: "small instances vs exhaustive phase grid",
        pass: good as f64 >= 0.9 * args.seeds as f64,
        detail: format!(
            "{good}/{} at >= 0.9x the K={} grid optimum (worst {worst:.3})",
            args.seeds, args.grid_levels
        ),
    })
}

pub fn run(args: &VerifyArgs) -> Result<()> {
    if args.seeds == 0 {
        bail!("--seeds must be positive");
    }
    let checks = [
        gradient_check(args)?,
        model_check(args)?,
        constraint_check(args)?,
        hessian_check(args)?,
        fd_check(args)?,
        grid_check(args)?,
    ];
    let mut failed = 0;
    for c in &checks {
        println!(
            "{}: {} ({})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
        if !c.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        bail!("{failed} of {} checks failed", checks.len());
    }
    Ok(())
}
