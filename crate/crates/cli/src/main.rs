//! `trihybrid`: Monte-Carlo experiments, convergence traces and the oracle
//! self-check for tri-hybrid ISAC beamforming.

mod verify;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use trihybrid::baselines::{solve_manifold, ArchitectureKind};
use trihybrid::harness::{
    build_instance, format_float, run_scenario, sweep_nu, sweep_tradeoff, write_aggregates,
    write_results, OutputFormat, ScenarioConfig, TriHybridSolver,
};
use trihybrid::optimizer::{solve, GradientForm, IterationTrace};

#[derive(Parser, Debug)]
#[command(name = "trihybrid", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One row per (architecture, delta_c, realization).
    Run(RunArgs),
    /// Per-architecture means over the delta_c grid.
    SweepTradeoff(RunArgs),
    /// Per-architecture means for several waveguide lengths N_u.
    SweepNu {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated N_u values.
        #[arg(long, value_delimiter = ',', default_value = "8,16,24,32,40,48")]
        values: Vec<usize>,
    },
    /// Iteration trace of the tri-hybrid solver on one realization.
    Convergence(ConvergenceArgs),
    /// Checks the solver against the independent reference computations.
    Verify(verify::VerifyArgs),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SolverArg {
    ClosedForm,
    Manifold,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum GradientArg {
    Wirtinger,
    Printed,
    Tight,
}

/// Scenario settings. Flags override the config file, which overrides the
/// built-in defaults.
#[derive(Args, Debug)]
struct ScenarioArgs {
    /// JSON file with any subset of the scenario fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Communications weights (sensing weight is 1 - delta_c).
    #[arg(long, value_delimiter = ',')]
    delta_c: Option<Vec<f64>>,
    /// Architectures to compare, e.g. TRI_HYBRID,FD_SN.
    #[arg(long, value_delimiter = ',')]
    arch: Option<Vec<ArchitectureKind>>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long)]
    n_waveguides: Option<usize>,
    #[arg(long)]
    elements_per_waveguide: Option<usize>,
    #[arg(long)]
    power_dbm: Option<f64>,
    #[arg(long)]
    noise_dbm: Option<f64>,
    /// Scattering paths per channel.
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    #[arg(long, value_enum)]
    gradient: Option<GradientArg>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Write wall_ms as 0 so repeated runs give identical files.
    #[arg(long)]
    no_wall_time: bool,
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<ScenarioConfig> {
        let mut c = match &self.config {
            Some(path) => {
                ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))?
            }
            None => ScenarioConfig::default(),
        };
        if let Some(v) = &self.delta_c {
            c.delta_c = v.clone();
        }
        if let Some(v) = &self.arch {
            c.architectures = v.clone();
        }
        set(&mut c.n_realizations, self.realizations);
        set(&mut c.base_seed, self.base_seed);
        set(&mut c.n_waveguides, self.n_waveguides);
        set(&mut c.elements_per_waveguide, self.elements_per_waveguide);
        set(&mut c.power_budget_dbm, self.power_dbm);
        set(&mut c.noise_power_dbm, self.noise_dbm);
        set(&mut c.n_paths, self.paths);
        set(&mut c.solver.max_iterations, self.max_iterations);
        set(&mut c.solver.rel_tolerance, self.tolerance);
        if let Some(s) = self.solver {
            c.tri_hybrid_solver = match s {
                SolverArg::ClosedForm => TriHybridSolver::ClosedForm,
                SolverArg::Manifold => TriHybridSolver::Manifold,
            };
        }
        if let Some(g) = self.gradient {
            c.solver.gradient = match g {
                GradientArg::Wirtinger => GradientForm::Wirtinger,
                GradientArg::Printed => GradientForm::Printed,
                GradientArg::Tight => GradientForm::Tight,
            };
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        if self.no_wall_time {
            c.record_wall_time = false;
        }
        c.validate()?;
        Ok(c)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Capture iteration traces and write one CSV per run into this directory.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Realization index; the channel seed is base_seed + index.
    #[arg(long, default_value_t = 0)]
    realization: u64,
    /// Trace CSV (default: stdout).
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Also trace the manifold solver on the same instance.
    #[arg(long)]
    manifold_trace_out: Option<PathBuf>,
    /// Write the closed-form design as JSON.
    #[arg(long)]
    solution_out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(args: &RunArgs) -> Result<()> {
    let mut config = args.scenario.resolve()?;
    config.capture_traces = args.trace_dir.is_some();
    let rows = run_scenario(&config)?;
    let failures = rows.iter().filter(|r| !r.is_ok()).count();
    if failures > 0 {
        eprintln!("warning: {failures} solve(s) failed and carry NaN metrics");
    }
    let mut out = output(args.out.as_deref())?;
    write_results(&rows, args.format.into(), &mut out)?;
    out.flush()?;
    if let Some(dir) = &args.trace_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for row in &rows {
            if let Some(trace) = &row.trace {
                let name = format!(
                    "{}_dc{}_seed{}.csv",
                    row.arch.as_str(),
                    format_float(row.delta_c),
                    row.seed
                );
                write_trace(trace, Some(&dir.join(name)))?;
            }
        }
    }
    Ok(())
}

fn tradeoff(args: &RunArgs) -> Result<()> {
    let mut config = args.scenario.resolve()?;
    if args.scenario.delta_c.is_none() && args.scenario.config.is_none() {
        config.delta_c = ScenarioConfig::tradeoff_grid();
    }
    let rows = sweep_tradeoff(&config)?;
    let mut out = output(args.out.as_deref())?;
    write_aggregates(&rows, args.format.into(), &mut out)?;
    out.flush()?;
    Ok(())
}

fn nu_sweep(args: &RunArgs, values: &[usize]) -> Result<()> {
    let config = args.scenario.resolve()?;
    let rows = sweep_nu(&config, values)?;
    let mut out = output(args.out.as_deref())?;
    write_aggregates(&rows, args.format.into(), &mut out)?;
    out.flush()?;
    Ok(())
}

fn write_trace(trace: &IterationTrace, path: Option<&Path>) -> Result<()> {
    let mut out = output(path)?;
    trace.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn convergence(args: &ConvergenceArgs) -> Result<()> {
    let config = args.scenario.resolve()?;
    let delta_c = match config.delta_c.as_slice() {
        [d] => *d,
        [] => bail!("convergence needs one delta_c value"),
        many => bail!("convergence takes a single delta_c, got {}", many.len()),
    };
    let seed = config.base_seed.wrapping_add(args.realization);
    let inst = build_instance(&config, ArchitectureKind::TriHybrid, seed, delta_c)?;
    let layout = inst.geometry.layout();
    let options = config.solver.with_seed(seed);

    let sol = solve(&inst.problem, layout, &inst.gains, &options)?;
    write_trace(&sol.trace, args.trace_out.as_deref())?;
    eprintln!(
        "closed-form: {} iterations, converged={}, ratio {:.9e}",
        sol.iterations(),
        sol.converged,
        sol.ratio
    );
    if let Some(path) = &args.solution_out {
        let record = sol
            .record(
                &inst.problem,
                layout,
                &config.power_model,
                inst.descriptor.counts,
            )?
            .tagged(inst.descriptor);
        fs::write(path, record.to_json()?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.manifold_trace_out {
        let man = solve_manifold(
            &inst.problem,
            layout,
            &inst.gains,
            &options,
            &config.manifold,
        )?;
        write_trace(&man.trace, Some(path))?;
        eprintln!(
            "manifold: {} iterations, converged={}, ratio {:.9e}",
            man.iterations(),
            man.converged,
            man.ratio
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::SweepTradeoff(a) => tradeoff(a),
        Command::SweepNu { run, values } => nu_sweep(run, values),
        Command::Convergence(a) => convergence(a),
        Command::Verify(a) => verify::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
