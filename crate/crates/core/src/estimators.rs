//! Point and variance estimators for test positivity and true prevalence.
//!
//! A sample of `n` units is drawn without replacement from a population of
//! `N` units and screened with a test of known sensitivity and specificity.
//! The positivity rate `n⁺/n` is corrected for misclassification with the
//! Rogan–Gladen formula. Three variance estimators for the positivity rate
//! are provided:
//!
//! * `v1`: the binomial variance `π̂(1−π̂)/n`, ignoring the finite population;
//! * `v2`: `v1` scaled by Cochran's finite population correction;
//! * `v3`: `v2` plus the variance of the population-wide test-positive count
//!   `N_c*` around its mean, which is not zero because the number of *true*
//!   cases, not the number of test positives, is what stays fixed.
//!
//! Any of them maps to a variance for the corrected prevalence by dividing by
//! `(Se + Sp − 1)²`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Sensitivity/specificity pair of an informative diagnostic test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestKit {
    sensitivity: f64,
    specificity: f64,
}

impl TestKit {
    /// Rejects probabilities outside `[0, 1]` and kits with `Se + Sp ≤ 1`.
    pub fn new(sensitivity: f64, specificity: f64) -> Result<Self> {
        check_probability("sensitivity", sensitivity)?;
        check_probability("specificity", specificity)?;
        if sensitivity - (1.0 - specificity) <= 0.0 {
            return Err(Error::Uninformative {
                se: sensitivity,
                sp: specificity,
            });
        }
        Ok(Self {
            sensitivity,
            specificity,
        })
    }

    /// A gold-standard test (`Se = Sp = 1`).
    pub fn perfect() -> Self {
        Self {
            sensitivity: 1.0,
            specificity: 1.0,
        }
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn specificity(&self) -> f64 {
        self.specificity
    }

    /// `Se + Sp − 1`, strictly positive.
    pub fn youden(&self) -> f64 {
        self.sensitivity - self.false_positive_rate()
    }

    /// `1 − Sp`; exact in floating point whenever `Sp ≥ ½`.
    pub fn false_positive_rate(&self) -> f64 {
        1.0 - self.specificity
    }

    /// Rogan–Gladen map `(p + Sp − 1)/(Se + Sp − 1)`, unthresholded.
    pub fn correct(&self, positivity: f64) -> f64 {
        (positivity - self.false_positive_rate()) / self.youden()
    }

    /// Probability that a unit with the given true prevalence tests positive.
    pub fn positivity(&self, true_prevalence: f64) -> f64 {
        true_prevalence * self.sensitivity + (1.0 - true_prevalence) * (1.0 - self.specificity)
    }
}

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Probability { name, value })
    }
}

/// Observed screening sample: `n⁺` positives among `n` units drawn from a
/// population of `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampleSummary {
    population_size: u64,
    sample_size: u64,
    positives: u64,
}

impl SampleSummary {
    /// Requires `2 ≤ n ≤ N` and `n⁺ ≤ n`. A single-unit sample is rejected
    /// because the Cochran correction divides by `n − 1`.
    pub fn new(population_size: u64, sample_size: u64, positives: u64) -> Result<Self> {
        if sample_size < 2 {
            return Err(Error::Sample(format!(
                "sample size must be at least 2, got {sample_size}"
            )));
        }
        if sample_size > population_size {
            return Err(Error::Sample(format!(
                "sample size {sample_size} exceeds population size {population_size}"
            )));
        }
        if positives > sample_size {
            return Err(Error::Sample(format!(
                "{positives} positives in a sample of {sample_size}"
            )));
        }
        Ok(Self {
            population_size,
            sample_size,
            positives,
        })
    }

    pub fn population_size(&self) -> u64 {
        self.population_size
    }

    pub fn sample_size(&self) -> u64 {
        self.sample_size
    }

    pub fn positives(&self) -> u64 {
        self.positives
    }

    /// Cochran's correction for this sample; the invariants make it total.
    pub fn fpc(&self) -> f64 {
        cochran_fpc(self.sample_size, self.population_size)
    }
}

/// Variance estimators of the positivity rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceBundle {
    /// Binomial variance, no finite population correction.
    pub v1: f64,
    /// Cochran FPC-adjusted variance.
    pub v2: f64,
    /// `v2 + extra_term`.
    pub v3: f64,
    /// Misclassification component `Var(N_c*)/N²` evaluated at the estimate.
    pub extra_term: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrevalenceEstimate {
    /// Test positivity `n⁺/n`.
    pub pi_hat: f64,
    /// Corrected prevalence, thresholded into `[0, 1]`.
    pub pi_c_hat: f64,
    /// Corrected prevalence before thresholding.
    pub pi_c_raw: f64,
    pub variances: VarianceBundle,
    /// Standard error of `pi_c_hat` based on `v3`.
    pub se_pi_c: f64,
}

impl PrevalenceEstimate {
    /// Standard error of the corrected prevalence based on `v1`.
    pub fn se_naive(&self, kit: &TestKit) -> f64 {
        var_corrected(self.variances.v1, kit).sqrt()
    }

    /// Standard error of the corrected prevalence based on `v2`.
    pub fn se_fpc(&self, kit: &TestKit) -> f64 {
        var_corrected(self.variances.v2, kit).sqrt()
    }
}

/// Rogan–Gladen correction, before and after thresholding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corrected {
    pub raw: f64,
    pub thresholded: f64,
}

pub fn positivity_rate(s: &SampleSummary) -> f64 {
    s.positives as f64 / s.sample_size as f64
}

/// Cochran's finite population correction `n(N−n) / (N(n−1))`.
pub fn fpc_factor(n: u64, population_size: u64) -> Result<f64> {
    if n < 2 || n > population_size {
        return Err(Error::Sample(format!(
            "finite population correction needs 2 <= n <= N, got n = {n}, N = {population_size}"
        )));
    }
    Ok(cochran_fpc(n, population_size))
}

fn cochran_fpc(n: u64, population_size: u64) -> f64 {
    let (n, big_n) = (n as f64, population_size as f64);
    n * (big_n - n) / (big_n * (n - 1.0))
}

pub fn var_naive(pi_hat: f64, n: u64) -> f64 {
    pi_hat * (1.0 - pi_hat) / n as f64
}

pub fn var_fpc(pi_hat: f64, n: u64, population_size: u64) -> Result<f64> {
    Ok(fpc_factor(n, population_size)? * var_naive(pi_hat, n))
}

/// Corrects the positivity rate for misclassification.
///
/// The thresholded value is 0 when `π̂ ≤ 1 − Sp`, 1 when `π̂ ≥ Se`, and the raw
/// correction otherwise.
pub fn rogan_gladen(pi_hat: f64, kit: &TestKit) -> Corrected {
    let raw = kit.correct(pi_hat);
    let thresholded = if pi_hat <= kit.false_positive_rate() {
        0.0
    } else if pi_hat >= kit.sensitivity {
        1.0
    } else {
        // no-op unless 1 − Sp is inexact (Sp < 0.5)
        raw.clamp(0.0, 1.0)
    };
    Corrected { raw, thresholded }
}

/// `(1/N)[π_c·Se(1−Se) + (1−π_c)·Sp(1−Sp)]`, the variance of `N_c*/N` given a
/// fixed number of true cases, with `π_c` replaced by an estimate.
pub fn misclass_extra_variance(pi_c_hat: f64, kit: &TestKit, population_size: u64) -> f64 {
    let se = kit.sensitivity;
    let sp = kit.specificity;
    (pi_c_hat * se * (1.0 - se) + (1.0 - pi_c_hat) * sp * (1.0 - sp)) / population_size as f64
}

pub fn var_total(pi_hat: f64, pi_c_hat: f64, s: &SampleSummary, kit: &TestKit) -> VarianceBundle {
    let v1 = var_naive(pi_hat, s.sample_size);
    let v2 = s.fpc() * v1;
    let extra_term = misclass_extra_variance(pi_c_hat, kit, s.population_size);
    VarianceBundle {
        v1,
        v2,
        v3: v2 + extra_term,
        extra_term,
    }
}

/// Maps a variance of the positivity rate to one of the corrected prevalence.
pub fn var_corrected(var_pi_hat: f64, kit: &TestKit) -> f64 {
    let d = kit.youden();
    var_pi_hat / (d * d)
}

/// Full estimate for one sample. The misclassification term is evaluated at
/// the thresholded prevalence so it stays a nonnegative variance.
pub fn estimate(s: &SampleSummary, kit: &TestKit) -> PrevalenceEstimate {
    let pi_hat = positivity_rate(s);
    let corrected = rogan_gladen(pi_hat, kit);
    let variances = var_total(pi_hat, corrected.thresholded, s, kit);
    PrevalenceEstimate {
        pi_hat,
        pi_c_hat: corrected.thresholded,
        pi_c_raw: corrected.raw,
        variances,
        se_pi_c: variances.v3.sqrt() / kit.youden(),
    }
}

/// `E(N_c* | N_c) = N_c·Se + (N − N_c)(1 − Sp)`.
pub fn test_positive_mean(population_size: u64, true_cases: u64, kit: &TestKit) -> f64 {
    let cases = true_cases as f64;
    let healthy = (population_size - true_cases) as f64;
    cases * kit.sensitivity + healthy * (1.0 - kit.specificity)
}

/// `Var(N_c* | N_c) = N_c·Se(1−Se) + (N − N_c)·Sp(1−Sp)`.
pub fn test_positive_variance(population_size: u64, true_cases: u64, kit: &TestKit) -> f64 {
    let cases = true_cases as f64;
    let healthy = (population_size - true_cases) as f64;
    let (se, sp) = (kit.sensitivity, kit.specificity);
    cases * se * (1.0 - se) + healthy * sp * (1.0 - sp)
}
