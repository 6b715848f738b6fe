//! Seeded Monte-Carlo experiments over architectures, objective weights and
//! array sizes, with CSV/JSON output.

mod config;
mod emit;
mod runner;
mod sweep;

pub use config::{dbm_to_mw, ScenarioConfig, TriHybridSolver};
pub use emit::{
    emit, format_float, read_results_json, write_aggregates, write_aggregates_csv, write_results,
    write_results_csv, write_results_json, OutputFormat, AGGREGATE_HEADER, RESULT_HEADER,
};
pub use runner::{build_instance, run_scenario, target_direction, ResultRow, ScenarioInstance};
pub use sweep::{aggregate, sweep_nu, sweep_tradeoff, AggregateRow, Estimate};
