//! Finite-population Monte Carlo engine.
//!
//! Each replication tests the whole population once (the would-be positive
//! count `N_c*` is a sum of two binomials given the fixed number of true
//! cases), then draws a simple random sample without replacement and counts
//! its positives with a hypergeometric draw.
//!
//! Replication `i` of a scenario draws from its own ChaCha8 stream: the key
//! is a hash of the master seed and the scenario identity, the stream number
//! is `i`. Results therefore do not depend on how replications are scheduled
//! across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Hypergeometric};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{check_probability, estimate, PrevalenceEstimate, SampleSummary, TestKit};
use crate::intervals::{self, credible_misclass_from_quantiles, wald_ci, Interval};

/// Random stream type used by the engine.
pub type Stream = ChaCha8Rng;

/// One simulation cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub population_size: u64,
    pub true_prevalence: f64,
    pub sampling_rate: f64,
    pub kit: TestKit,
    pub replications: u64,
    pub alpha: f64,
    pub seed: u64,
}

/// Half-up rounding of `fraction · total`.
fn round_count(fraction: f64, total: u64) -> u64 {
    (fraction * total as f64 + 0.5).floor() as u64
}

impl ScenarioConfig {
    /// `n = round(φ·N)`.
    pub fn sample_size(&self) -> u64 {
        round_count(self.sampling_rate, self.population_size)
    }

    /// `N_c = round(π_c·N)`.
    pub fn true_cases(&self) -> u64 {
        round_count(self.true_prevalence, self.population_size)
    }

    /// `N_c / N`, the prevalence actually realized in the simulated population.
    pub fn realized_prevalence(&self) -> f64 {
        self.true_cases() as f64 / self.population_size as f64
    }

    /// Test-positive frequency `π = π_c·Se + (1 − π_c)(1 − Sp)`.
    pub fn positivity(&self) -> f64 {
        self.kit.positivity(self.true_prevalence)
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Config(format!(
                "population size must be at least 2, got {}",
                self.population_size
            )));
        }
        check_probability("true prevalence", self.true_prevalence)?;
        if !(self.sampling_rate > 0.0 && self.sampling_rate <= 1.0) {
            return Err(Error::Config(format!(
                "sampling rate must lie in (0, 1], got {}",
                self.sampling_rate
            )));
        }
        let n = self.sample_size();
        if n < 2 || n > self.population_size {
            return Err(Error::Config(format!(
                "sampling rate {} gives sample size {n}; need 2 <= n <= {}",
                self.sampling_rate, self.population_size
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Alpha(self.alpha));
        }
        Ok(())
    }

    /// Stable identity of the cell's population and design; replication
    /// count, α and the seed are excluded.
    pub fn scenario_id(&self) -> u64 {
        [
            self.population_size,
            self.true_cases(),
            self.sample_size(),
            self.kit.sensitivity().to_bits(),
            self.kit.specificity().to_bits(),
        ]
        .iter()
        .fold(0x5052_4556_4b49_5400, |h, &v| splitmix64(h ^ splitmix64(v)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PopulationRealization {
    /// Units that would test positive if the whole population were screened.
    pub n_c_star: u64,
    pub true_cases: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicationResult {
    pub index: u64,
    pub sample: SampleSummary,
    pub estimate: PrevalenceEstimate,
    pub wald: Interval,
    pub credible: Interval,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for replication `index` of the scenario `scenario_id`.
pub fn substream(seed: u64, scenario_id: u64, index: u64) -> Stream {
    let mut state = splitmix64(seed) ^ scenario_id;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

pub fn binomial_draw<R: Rng + ?Sized>(trials: u64, p: f64, rng: &mut R) -> u64 {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    Binomial::new(trials, p)
        .expect("0 < p < 1 is a valid binomial parameter")
        .sample(rng)
}

/// Marked units in a size-`n` draw without replacement from `N` units, `K` marked.
pub fn hypergeometric_draw<R: Rng + ?Sized>(
    population: u64,
    marked: u64,
    n: u64,
    rng: &mut R,
) -> u64 {
    debug_assert!(marked <= population && n <= population);
    if marked == 0 || n == 0 {
        return 0;
    }
    if marked == population {
        return n;
    }
    if n == population {
        return marked;
    }
    Hypergeometric::new(population, marked, n)
        .expect("counts are consistent")
        .sample(rng)
}

pub fn realize_population<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> PopulationRealization {
    let true_cases = cfg.true_cases();
    let kit = &cfg.kit;
    let true_positive = binomial_draw(true_cases, kit.sensitivity(), rng);
    let false_positive = binomial_draw(
        cfg.population_size - true_cases,
        1.0 - kit.specificity(),
        rng,
    );
    PopulationRealization {
        n_c_star: true_positive + false_positive,
        true_cases,
    }
}

/// Screen the population, then sample it: returns the observed sample.
pub fn draw_sample<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> SampleSummary {
    let population = realize_population(cfg, rng);
    let n = cfg.sample_size();
    let positives = hypergeometric_draw(cfg.population_size, population.n_c_star, n, rng);
    SampleSummary::new(cfg.population_size, n, positives).expect("validated scenario")
}

/// One full replication: sample, estimate, Wald and credible intervals.
pub fn replicate<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<ReplicationResult> {
    cfg.validate()?;
    let sample = draw_sample(cfg, rng);
    let quantiles = intervals::jeffreys_quantiles(&sample, cfg.alpha)?;
    finish_replication(cfg, 0, sample, quantiles)
}

fn finish_replication(
    cfg: &ScenarioConfig,
    index: u64,
    sample: SampleSummary,
    quantiles: (f64, f64),
) -> Result<ReplicationResult> {
    let est = estimate(&sample, &cfg.kit);
    let wald = wald_ci(est.pi_c_hat, est.se_pi_c, cfg.alpha)?;
    let credible = credible_misclass_from_quantiles(&sample, &cfg.kit, cfg.alpha, quantiles);
    Ok(ReplicationResult {
        index,
        sample,
        estimate: est,
        wald,
        credible,
    })
}

/// Runs every replication of `cfg` in parallel on the current rayon pool.
/// Output is ordered by replication index and independent of the pool size.
pub fn run_replications(cfg: &ScenarioConfig) -> Result<Vec<ReplicationResult>> {
    cfg.validate()?;
    let n = cfg.sample_size();
    let id = cfg.scenario_id();

    // Posterior percentiles depend only on n⁺; share them across replications.
    let quantiles = (0..=n)
        .into_par_iter()
        .map(|k| {
            let s = SampleSummary::new(cfg.population_size, n, k)?;
            intervals::jeffreys_quantiles(&s, cfg.alpha)
        })
        .collect::<Result<Vec<_>>>()?;

    (0..cfg.replications)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(cfg.seed, id, i);
            let sample = draw_sample(cfg, &mut rng);
            finish_replication(cfg, i, sample, quantiles[sample.positives() as usize])
        })
        .collect()
}

/// Point and variance estimates only, one per replication, on the same
/// streams as [`run_replications`].
pub fn run_estimates(cfg: &ScenarioConfig) -> Result<Vec<PrevalenceEstimate>> {
    cfg.validate()?;
    let id = cfg.scenario_id();
    Ok((0..cfg.replications)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(cfg.seed, id, i);
            estimate(&draw_sample(cfg, &mut rng), &cfg.kit)
        })
        .collect())
}
