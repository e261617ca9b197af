//! Scenario grids and the standard-error sweep built on [`crate::sim`].

pub mod cli;
pub mod report;
pub mod svg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::TestKit;
use crate::sim::{self, ReplicationResult, ScenarioConfig};

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

fn mean(values: impl Iterator<Item = f64>, count: usize) -> f64 {
    let mut acc = CompensatedSum::default();
    values.for_each(|v| acc.add(v));
    acc.value() / count as f64
}

/// Sample standard deviation (n − 1 denominator); zero for fewer than two values.
fn sample_sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values.iter().copied(), values.len());
    let mut acc = CompensatedSum::default();
    for v in values {
        acc.add((v - m) * (v - m));
    }
    (acc.value() / (values.len() - 1) as f64).sqrt()
}

/// The per-replication quantities a [`ScenarioSummary`] is aggregated from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub index: u64,
    pub positives: u64,
    pub pi_hat: f64,
    pub pi_c_hat: f64,
    pub se_pi_c: f64,
    pub wald_lower: f64,
    pub wald_upper: f64,
    pub cred_lower: f64,
    pub cred_upper: f64,
}

impl From<&ReplicationResult> for ReplicationRecord {
    fn from(r: &ReplicationResult) -> Self {
        Self {
            index: r.index,
            positives: r.sample.positives(),
            pi_hat: r.estimate.pi_hat,
            pi_c_hat: r.estimate.pi_c_hat,
            se_pi_c: r.estimate.se_pi_c,
            wald_lower: r.wald.lower,
            wald_upper: r.wald.upper,
            cred_lower: r.credible.lower,
            cred_upper: r.credible.upper,
        }
    }
}

/// Monte Carlo summary of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSummary {
    pub config: ScenarioConfig,
    pub mean_estimate: f64,
    pub sd_estimate: f64,
    /// Mean of the per-replication `v3`-based standard errors.
    pub avg_se: f64,
    pub wald_coverage: f64,
    pub wald_avg_width: f64,
    pub cred_coverage: f64,
    pub cred_avg_width: f64,
}

/// Aggregates replications in index order. Coverage is measured against the
/// realized population prevalence `N_c/N` with closed endpoints.
pub fn summarize(cfg: &ScenarioConfig, records: &[ReplicationRecord]) -> Result<ScenarioSummary> {
    if records.is_empty() {
        return Err(Error::Config(
            "a scenario needs at least one replication".into(),
        ));
    }
    let count = records.len();
    let truth = cfg.realized_prevalence();
    let covers = |lo: f64, hi: f64| if lo <= truth && truth <= hi { 1.0 } else { 0.0 };
    let estimates: Vec<f64> = records.iter().map(|r| r.pi_c_hat).collect();
    Ok(ScenarioSummary {
        config: *cfg,
        mean_estimate: mean(estimates.iter().copied(), count),
        sd_estimate: sample_sd(&estimates),
        avg_se: mean(records.iter().map(|r| r.se_pi_c), count),
        wald_coverage: mean(
            records.iter().map(|r| covers(r.wald_lower, r.wald_upper)),
            count,
        ),
        wald_avg_width: mean(records.iter().map(|r| r.wald_upper - r.wald_lower), count),
        cred_coverage: mean(
            records.iter().map(|r| covers(r.cred_lower, r.cred_upper)),
            count,
        ),
        cred_avg_width: mean(records.iter().map(|r| r.cred_upper - r.cred_lower), count),
    })
}

/// Runs all replications of one cell and returns the summary with the
/// per-replication records it was built from.
pub fn run_scenario_detailed(
    cfg: &ScenarioConfig,
) -> Result<(ScenarioSummary, Vec<ReplicationRecord>)> {
    if cfg.replications == 0 {
        return Err(Error::Config("replications must be positive".into()));
    }
    let records: Vec<ReplicationRecord> = sim::run_replications(cfg)?
        .iter()
        .map(ReplicationRecord::from)
        .collect();
    Ok((summarize(cfg, &records)?, records))
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioSummary> {
    run_scenario_detailed(cfg).map(|(summary, _)| summary)
}

/// Cross product of scenario parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub population_sizes: Vec<u64>,
    pub kits: Vec<TestKit>,
    pub prevalences: Vec<f64>,
    pub sampling_rates: Vec<f64>,
    pub replications: u64,
    pub alpha: f64,
    pub seed: u64,
}

/// The two kits studied throughout: (0.9, 0.95) and (0.8, 0.85).
pub fn reference_kits() -> Vec<TestKit> {
    vec![
        TestKit::new(0.9, 0.95).expect("valid kit"),
        TestKit::new(0.8, 0.85).expect("valid kit"),
    ]
}

impl GridConfig {
    /// N ∈ {100, 500, 1000}, both reference kits, π_c, φ ∈ {0.1, 0.3, 0.5}.
    pub fn reference(replications: u64, seed: u64) -> Self {
        Self {
            population_sizes: vec![100, 500, 1000],
            kits: reference_kits(),
            prevalences: vec![0.1, 0.3, 0.5],
            sampling_rates: vec![0.1, 0.3, 0.5],
            replications,
            alpha: 0.05,
            seed,
        }
    }

    /// Cells in (N, kit, π_c, φ) order.
    pub fn cells(&self) -> Vec<ScenarioConfig> {
        let mut cells = Vec::new();
        for &population_size in &self.population_sizes {
            for &kit in &self.kits {
                for &true_prevalence in &self.prevalences {
                    for &sampling_rate in &self.sampling_rates {
                        cells.push(ScenarioConfig {
                            population_size,
                            true_prevalence,
                            sampling_rate,
                            kit,
                            replications: self.replications,
                            alpha: self.alpha,
                            seed: self.seed,
                        });
                    }
                }
            }
        }
        cells
    }
}

pub fn run_table_grid(grid: &GridConfig) -> Result<Vec<ScenarioSummary>> {
    let cells = grid.cells();
    if cells.is_empty() {
        return Err(Error::Config("scenario grid is empty".into()));
    }
    for cell in &cells {
        cell.validate()?;
    }
    cells.iter().map(run_scenario).collect()
}

/// Population-size sweep at a fixed sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub sample_size: u64,
    pub true_prevalence: f64,
    pub population_sizes: Vec<u64>,
    pub kits: Vec<TestKit>,
    pub replications: u64,
    pub seed: u64,
}

impl SweepConfig {
    /// n = 100, π_c = 0.2, N = 120, 140, …, 2000, both reference kits.
    pub fn reference(replications: u64, seed: u64) -> Self {
        Self {
            sample_size: 100,
            true_prevalence: 0.2,
            population_sizes: population_grid(120, 2000, 20),
            kits: reference_kits(),
            replications,
            seed,
        }
    }
}

/// `start, start + step, …` up to and including `end` when it lies on the grid.
pub fn population_grid(start: u64, end: u64, step: u64) -> Vec<u64> {
    (start..=end).step_by(step.max(1) as usize).collect()
}

/// Averaged standard errors of the corrected prevalence at one population size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub population_size: u64,
    pub se: f64,
    pub sp: f64,
    /// From `v1` (no finite population correction).
    pub se_mle: f64,
    /// From `v3`.
    pub se_new: f64,
    /// Standard deviation of the corrected estimates across replications.
    pub se_empirical: f64,
    /// From `v2` (Cochran FPC only).
    pub se_fpc: f64,
}

pub fn run_figure1_sweep(sweep: &SweepConfig) -> Result<Vec<SweepRow>> {
    if sweep.replications < 2 {
        return Err(Error::Config(
            "a sweep needs at least two replications".into(),
        ));
    }
    if sweep.population_sizes.is_empty() || sweep.kits.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    let mut rows = Vec::with_capacity(sweep.kits.len() * sweep.population_sizes.len());
    for kit in &sweep.kits {
        for &population_size in &sweep.population_sizes {
            if population_size < sweep.sample_size {
                return Err(Error::Config(format!(
                    "population size {population_size} is below the sample size {}",
                    sweep.sample_size
                )));
            }
            let cfg = ScenarioConfig {
                population_size,
                true_prevalence: sweep.true_prevalence,
                sampling_rate: sweep.sample_size as f64 / population_size as f64,
                kit: *kit,
                replications: sweep.replications,
                alpha: 0.05,
                seed: sweep.seed,
            };
            debug_assert_eq!(cfg.sample_size(), sweep.sample_size);
            let estimates = sim::run_estimates(&cfg)?;
            let count = estimates.len();
            let pi_c: Vec<f64> = estimates.iter().map(|e| e.pi_c_hat).collect();
            rows.push(SweepRow {
                population_size,
                se: kit.sensitivity(),
                sp: kit.specificity(),
                se_mle: mean(estimates.iter().map(|e| e.se_naive(kit)), count),
                se_new: mean(estimates.iter().map(|e| e.se_pi_c), count),
                se_empirical: sample_sd(&pi_c),
                se_fpc: mean(estimates.iter().map(|e| e.se_fpc(kit)), count),
            });
        }
    }
    Ok(rows)
}
