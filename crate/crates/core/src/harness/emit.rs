use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::runner::ResultRow;
use super::sweep::AggregateRow;

pub const RESULT_HEADER: [&str; 11] = [
    "arch",
    "delta_c",
    "seed",
    "snr",
    "rate_bps_hz",
    "sensing_mw",
    "tx_mw",
    "ee",
    "iters",
    "wall_ms",
    "converged",
];

pub const AGGREGATE_HEADER: [&str; 14] = [
    "arch",
    "n_u",
    "delta_c",
    "n",
    "failures",
    "snr_mean",
    "rate_mean",
    "rate_se",
    "sensing_mean",
    "sensing_se",
    "ee_mean",
    "ee_se",
    "snr_se",
    "converged_fraction",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidConfig(format!(
                "unknown output format {other:?}"
            ))),
        }
    }
}

/// `%.12g`-style rendering: 12 significant digits, trailing zeros dropped.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-4..12).contains(&exp) {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        trim_zeros(&format!("{x:.*}", (11 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn rounded(x: f64) -> f64 {
    if x.is_finite() {
        format_float(x).parse().expect("formatted float")
    } else {
        x
    }
}

pub fn write_results_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_HEADER)?;
    for r in rows {
        w.write_record([
            r.arch.to_string(),
            format_float(r.delta_c),
            r.seed.to_string(),
            format_float(r.snr),
            format_float(r.rate),
            format_float(r.sensing_mw),
            format_float(r.tx_mw),
            format_float(r.ee),
            r.iters.to_string(),
            format_float(r.wall_ms),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results_json<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let rounded_rows: Vec<ResultRow> = rows
        .iter()
        .map(|r| ResultRow {
            delta_c: rounded(r.delta_c),
            snr: rounded(r.snr),
            rate: rounded(r.rate),
            sensing_mw: rounded(r.sensing_mw),
            tx_mw: rounded(r.tx_mw),
            ee: rounded(r.ee),
            wall_ms: rounded(r.wall_ms),
            trace: None,
            ..r.clone()
        })
        .collect();
    serde_json::to_writer_pretty(out, &rounded_rows)?;
    Ok(())
}

pub fn read_results_json<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    Ok(serde_json::from_reader(input)?)
}

pub fn write_results<W: Write>(rows: &[ResultRow], format: OutputFormat, out: W) -> Result<()> {
    match format {
        OutputFormat::Csv => write_results_csv(rows, out),
        OutputFormat::Json => write_results_json(rows, out),
    }
}

/// Writes `rows` to `path` in the requested format.
pub fn emit(rows: &[ResultRow], format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    write_results(rows, format, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_aggregates_csv<W: Write>(rows: &[AggregateRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for r in rows {
        w.write_record([
            r.arch.to_string(),
            r.elements_per_waveguide.to_string(),
            format_float(r.delta_c),
            r.n.to_string(),
            r.failures.to_string(),
            format_float(r.snr.mean),
            format_float(r.rate.mean),
            format_float(r.rate.std_error),
            format_float(r.sensing_mw.mean),
            format_float(r.sensing_mw.std_error),
            format_float(r.ee.mean),
            format_float(r.ee.std_error),
            format_float(r.snr.std_error),
            format_float(r.converged_fraction),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregates<W: Write>(
    rows: &[AggregateRow],
    format: OutputFormat,
    out: W,
) -> Result<()> {
    match format {
        OutputFormat::Csv => write_aggregates_csv(rows, out),
        OutputFormat::Json => Ok(serde_json::to_writer_pretty(out, rows)?),
    }
}
