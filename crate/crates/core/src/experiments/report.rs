//! CSV and JSON writers for scenario summaries, sweep rows and one-shot
//! estimates, plus the per-replication dump and its reader.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{ReplicationRecord, ScenarioSummary, SweepRow};
use crate::error::{Error, Result};

pub const SUMMARY_COLUMNS: [&str; 14] = [
    "N",
    "n",
    "pi_c",
    "se",
    "sp",
    "reps",
    "seed",
    "mean_est",
    "sd_est",
    "avg_se",
    "wald_cov",
    "wald_width",
    "cred_cov",
    "cred_width",
];

pub const SWEEP_COLUMNS: [&str; 7] = [
    "N",
    "se",
    "sp",
    "se_mle",
    "se_new",
    "se_empirical",
    "se_fpc",
];

/// `%g`-style rendering with `digits` significant digits and no trailing zeros.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent marker");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if exponent < -4 || exponent >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exponent)
    } else {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn sig(x: f64) -> String {
    format_significant(x, 6)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(format!("csv: {e}"))
}

fn io_error(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

#[derive(Debug, Serialize)]
struct SummaryRow {
    #[serde(rename = "N")]
    population_size: u64,
    n: u64,
    pi_c: f64,
    se: f64,
    sp: f64,
    reps: u64,
    seed: u64,
    mean_est: f64,
    sd_est: f64,
    avg_se: f64,
    wald_cov: f64,
    wald_width: f64,
    cred_cov: f64,
    cred_width: f64,
}

impl From<&ScenarioSummary> for SummaryRow {
    fn from(s: &ScenarioSummary) -> Self {
        let c = &s.config;
        Self {
            population_size: c.population_size,
            n: c.sample_size(),
            pi_c: c.true_prevalence,
            se: c.kit.sensitivity(),
            sp: c.kit.specificity(),
            reps: c.replications,
            seed: c.seed,
            mean_est: s.mean_estimate,
            sd_est: s.sd_estimate,
            avg_se: s.avg_se,
            wald_cov: s.wald_coverage,
            wald_width: s.wald_avg_width,
            cred_cov: s.cred_coverage,
            cred_width: s.cred_avg_width,
        }
    }
}

pub fn write_summaries_csv<W: Write>(out: W, rows: &[ScenarioSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_COLUMNS).map_err(csv_error)?;
    for r in rows.iter().map(SummaryRow::from) {
        w.write_record([
            r.population_size.to_string(),
            r.n.to_string(),
            sig(r.pi_c),
            sig(r.se),
            sig(r.sp),
            r.reps.to_string(),
            r.seed.to_string(),
            sig(r.mean_est),
            sig(r.sd_est),
            sig(r.avg_se),
            sig(r.wald_cov),
            sig(r.wald_width),
            sig(r.cred_cov),
            sig(r.cred_width),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(io_error)
}

pub fn write_summaries_json<W: Write>(mut out: W, rows: &[ScenarioSummary]) -> Result<()> {
    let rows: Vec<SummaryRow> = rows.iter().map(SummaryRow::from).collect();
    serde_json::to_writer_pretty(&mut out, &rows).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out).map_err(io_error)
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS).map_err(csv_error)?;
    for r in rows {
        w.write_record([
            r.population_size.to_string(),
            sig(r.se),
            sig(r.sp),
            sig(r.se_mle),
            sig(r.se_new),
            sig(r.se_empirical),
            sig(r.se_fpc),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(io_error)
}

pub fn write_sweep_json<W: Write>(mut out: W, rows: &[SweepRow]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out).map_err(io_error)
}

/// Per-replication dump. Floats are written in shortest round-trip form so
/// that [`read_replications`] recovers them bit for bit.
pub fn write_replications<W: Write>(out: W, records: &[ReplicationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush().map_err(io_error)
}

pub fn read_replications<R: Read>(input: R) -> Result<Vec<ReplicationRecord>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_error))
        .collect()
}

/// One-shot estimate with both intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    #[serde(rename = "N")]
    pub population_size: u64,
    pub n: u64,
    pub n_pos: u64,
    pub se: f64,
    pub sp: f64,
    pub alpha: f64,
    pub pi_hat: f64,
    pub pi_c_hat: f64,
    pub pi_c_raw: f64,
    pub se_pi_c: f64,
    pub wald_lower: f64,
    pub wald_upper: f64,
    pub cred_lower: f64,
    pub cred_upper: f64,
}

pub fn write_estimate_csv<W: Write>(out: W, report: &EstimateReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.serialize(report).map_err(csv_error)?;
    w.flush().map_err(io_error)
}

pub fn write_estimate_json<W: Write>(mut out: W, report: &EstimateReport) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, report).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out).map_err(io_error)
}

pub fn write_estimate_text<W: Write>(mut out: W, r: &EstimateReport) -> Result<()> {
    let level = format_significant(100.0 * (1.0 - r.alpha), 6);
    writeln!(
        out,
        "sample: {} positives of n = {} from N = {} (Se = {}, Sp = {})",
        r.n_pos, r.n, r.population_size, r.se, r.sp
    )
    .and_then(|_| writeln!(out, "test positivity      {:.6}", r.pi_hat))
    .and_then(|_| {
        writeln!(
            out,
            "corrected prevalence {:.6} (raw {:.6})",
            r.pi_c_hat, r.pi_c_raw
        )
    })
    .and_then(|_| writeln!(out, "standard error       {:.6}", r.se_pi_c))
    .and_then(|_| {
        writeln!(
            out,
            "{level}% Wald          [{:.6}, {:.6}]",
            r.wald_lower, r.wald_upper
        )
    })
    .and_then(|_| {
        writeln!(
            out,
            "{level}% credible      [{:.6}, {:.6}]",
            r.cred_lower, r.cred_upper
        )
    })
    .map_err(io_error)
}
