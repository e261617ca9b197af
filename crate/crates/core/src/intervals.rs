//! Interval estimators for the true prevalence.
//!
//! The credible intervals start from the Jeffreys posterior
//! `Beta(n⁺ + ½, n − n⁺ + ½)` of the positivity rate and apply an affine map
//! `x ↦ a·x + b` with `b = π̂(1 − a)`. The map keeps the posterior centred on
//! `π̂` while rescaling its spread: `a = √FPC` for a gold-standard test, and
//! `a′ = √(V̂₃/V̂₁)` when the test misclassifies, followed by the Rogan–Gladen
//! correction of both endpoints. Because the map is increasing, transformed
//! percentiles are percentiles of the transformed posterior, so no posterior
//! draws are needed.

use serde::Serialize;

use crate::beta::{self, BetaParams};
use crate::error::{Error, Result};
use crate::estimators::{estimate, positivity_rate, var_naive, SampleSummary, TestKit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    Wald,
    JeffreysAdjustedGold,
    CredibleMisclass,
}

/// Closed interval inside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub method: IntervalMethod,
    /// `1 − α`.
    pub nominal_level: f64,
    /// Affine scale applied to the posterior percentiles (credible methods only).
    pub scale: Option<f64>,
    /// Affine shift applied to the posterior percentiles (credible methods only).
    pub shift: Option<f64>,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Closed-endpoint containment.
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Alpha(alpha))
    }
}

/// Clip to `[0, 1]` and restore orientation if rounding flipped the endpoints.
fn clipped(lower: f64, upper: f64) -> (f64, f64) {
    let (lo, hi) = if lower <= upper {
        (lower, upper)
    } else {
        (upper, lower)
    };
    (lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0))
}

/// Standard normal quantile (Wichura's AS 241, about 1e−16 relative error).
#[allow(clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        let num = ((((((2.509_080_928_730_122_672_7e3 * r + 3.343_057_558_358_812_810_5e4) * r
            + 6.726_577_092_700_870_085_3e4)
            * r
            + 4.592_195_393_154_987_145_7e4)
            * r
            + 1.373_169_376_550_946_112_5e4)
            * r
            + 1.971_590_950_306_551_442_7e3)
            * r
            + 1.331_416_678_917_843_774_5e2)
            * r
            + 3.387_132_872_796_366_608_0;
        let den = ((((((5.226_495_278_852_854_561_0e3 * r + 2.872_908_573_572_194_267_4e4) * r
            + 3.930_789_580_009_271_061_0e4)
            * r
            + 2.121_379_430_158_659_586_7e4)
            * r
            + 5.394_196_021_424_751_107_7e3)
            * r
            + 6.871_870_074_920_579_083_0e2)
            * r
            + 4.231_333_070_160_091_125_2e1)
            * r
            + 1.0;
        return q * num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let z = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414_076_4e-4 * r + 2.272_384_498_926_918_458_33e-2)
            * r
            + 2.417_807_251_774_506_117_7e-1)
            * r
            + 1.270_458_252_452_368_382_58)
            * r
            + 3.647_848_324_763_204_605_04)
            * r
            + 5.769_497_221_460_691_405_5)
            * r
            + 4.630_337_846_156_545_295_9)
            * r
            + 1.423_437_110_749_683_577_34;
        let den = ((((((1.050_750_071_644_416_843_24e-9 * r + 5.475_938_084_995_344_946e-4)
            * r
            + 1.519_866_656_361_645_719_66e-2)
            * r
            + 1.481_039_764_274_800_745_9e-1)
            * r
            + 6.897_673_349_851_000_045_5e-1)
            * r
            + 1.676_384_830_183_803_849_4)
            * r
            + 2.053_191_626_637_758_821_87)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_132_65e-7 * r + 2.711_555_568_743_487_578_15e-5)
            * r
            + 1.242_660_947_388_078_438_6e-3)
            * r
            + 2.653_218_952_657_612_309_3e-2)
            * r
            + 2.965_605_718_285_048_912_3e-1)
            * r
            + 1.784_826_539_917_291_335_8)
            * r
            + 5.463_784_911_164_114_369_9)
            * r
            + 6.657_904_643_501_103_777_2;
        let den = ((((((2.044_263_103_389_939_785_64e-15 * r + 1.421_511_758_316_445_888_7e-7)
            * r
            + 1.846_318_317_510_054_681_8e-5)
            * r
            + 7.868_691_311_456_132_591e-4)
            * r
            + 1.487_536_129_085_061_485_25e-2)
            * r
            + 1.369_298_809_227_358_053_1e-1)
            * r
            + 5.998_322_065_558_879_376_9e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -z
    } else {
        z
    }
}

/// `π̂_c ± z_{1−α/2}·se`, clipped to `[0, 1]`.
pub fn wald_ci(pi_c_hat: f64, se: f64, alpha: f64) -> Result<Interval> {
    check_alpha(alpha)?;
    if se.is_nan() || se < 0.0 {
        return Err(Error::Config(format!(
            "standard error must be nonnegative, got {se}"
        )));
    }
    let z = normal_quantile(1.0 - alpha / 2.0);
    let (lower, upper) = clipped(pi_c_hat - z * se, pi_c_hat + z * se);
    Ok(Interval {
        lower,
        upper,
        method: IntervalMethod::Wald,
        nominal_level: 1.0 - alpha,
        scale: None,
        shift: None,
    })
}

/// Posterior percentiles `(Q_{α/2}, Q_{1−α/2})` of the Jeffreys posterior.
pub fn jeffreys_quantiles(s: &SampleSummary, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let posterior = BetaParams::jeffreys(s.positives(), s.sample_size());
    Ok((
        beta::quantile(alpha / 2.0, &posterior)?,
        beta::quantile(1.0 - alpha / 2.0, &posterior)?,
    ))
}

/// Jeffreys interval shrunk toward `π̂` by `√FPC`, for a gold-standard test.
pub fn jeffreys_adjusted_gold(s: &SampleSummary, alpha: f64) -> Result<Interval> {
    let (q_lo, q_hi) = jeffreys_quantiles(s, alpha)?;
    let pi_hat = positivity_rate(s);
    let a = s.fpc().sqrt();
    let b = pi_hat * (1.0 - a);
    let (lower, upper) = clipped(a * q_lo + b, a * q_hi + b);
    Ok(Interval {
        lower,
        upper,
        method: IntervalMethod::JeffreysAdjustedGold,
        nominal_level: 1.0 - alpha,
        scale: Some(a),
        shift: Some(b),
    })
}

/// Credible interval for the true prevalence under a misclassifying test.
pub fn credible_misclass(s: &SampleSummary, kit: &TestKit, alpha: f64) -> Result<Interval> {
    let quantiles = jeffreys_quantiles(s, alpha)?;
    Ok(credible_misclass_from_quantiles(s, kit, alpha, quantiles))
}

/// [`credible_misclass`] with the posterior percentiles supplied by the caller,
/// so repeated samples with the same `(n, n⁺)` can share them.
pub fn credible_misclass_from_quantiles(
    s: &SampleSummary,
    kit: &TestKit,
    alpha: f64,
    (q_lo, q_hi): (f64, f64),
) -> Interval {
    let est = estimate(s, kit);
    let pi_hat = est.pi_hat;
    let n = s.sample_size();
    let (v1, v3) = if s.positives() == 0 || s.positives() == n {
        // v1 vanishes at π̂ ∈ {0, 1}; the ratio uses the posterior mean instead.
        let smoothed = (s.positives() as f64 + 0.5) / (n as f64 + 1.0);
        let v1 = var_naive(smoothed, n);
        (v1, s.fpc() * v1 + est.variances.extra_term)
    } else {
        (est.variances.v1, est.variances.v3)
    };
    let a = (v3 / v1).sqrt();
    let b = pi_hat * (1.0 - a);
    let (lower, upper) = clipped(kit.correct(a * q_lo + b), kit.correct(a * q_hi + b));
    Interval {
        lower,
        upper,
        method: IntervalMethod::CredibleMisclass,
        nominal_level: 1.0 - alpha,
        scale: Some(a),
        shift: Some(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample(big_n: u64, n: u64, k: u64) -> SampleSummary {
        SampleSummary::new(big_n, n, k).unwrap()
    }

    /// Bisection-only inverse of the Beta CDF, independent of the Newton path.
    fn bisect_quantile(q: f64, a: f64, b: f64) -> f64 {
        let p = BetaParams::new(a, b).unwrap();
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if beta::cdf(mid, &p).unwrap() < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn normal_quantile_reference_values() {
        // frozen from a 50-digit reference evaluation
        let cases = [
            (0.975, 1.959_963_984_540_054),
            (0.5, 0.0),
            (0.95, 1.644_853_626_951_472_7),
            (0.995, 2.575_829_303_548_900_4),
            (0.1, -1.281_551_565_544_600_5),
            (1e-10, -6.361_340_902_404_056),
            (0.02, -2.053_748_910_631_823),
        ];
        for (p, z) in cases {
            assert_abs_diff_eq!(normal_quantile(p), z, epsilon = 1e-10);
        }
    }

    #[test]
    fn wald_examples() {
        let w = wald_ci(0.5, 0.0, 0.05).unwrap();
        assert_eq!((w.lower, w.upper), (0.5, 0.5));

        let w = wald_ci(0.3, 0.05, 0.05).unwrap();
        assert_abs_diff_eq!(w.lower, 0.3 - 1.959_963_985 * 0.05, epsilon = 1e-9);
        assert_abs_diff_eq!(w.upper, 0.3 + 1.959_963_985 * 0.05, epsilon = 1e-9);
        assert_abs_diff_eq!(w.lower, 0.202_002, epsilon = 1e-6);
        assert_abs_diff_eq!(w.upper, 0.397_998, epsilon = 1e-6);
        assert_eq!(w.method, IntervalMethod::Wald);
        assert_abs_diff_eq!(w.nominal_level, 0.95, epsilon = 1e-15);

        let w = wald_ci(0.02, 0.05, 0.05).unwrap();
        assert_eq!(w.lower, 0.0);

        assert!(wald_ci(0.3, 0.05, 0.0).is_err());
        assert!(wald_ci(0.3, 0.05, 1.0).is_err());
        assert!(wald_ci(0.3, -0.01, 0.05).is_err());
    }

    #[test]
    fn gold_census_collapses() {
        for k in [0, 7, 20] {
            let s = sample(20, 20, k);
            let i = jeffreys_adjusted_gold(&s, 0.05).unwrap();
            let p = k as f64 / 20.0;
            assert_eq!((i.lower, i.upper), (p, p));
            assert_eq!(i.scale, Some(0.0));
        }
    }

    #[test]
    fn gold_without_correction_is_plain_jeffreys() {
        let i = jeffreys_adjusted_gold(&sample(100, 10, 3), 0.05).unwrap();
        assert_abs_diff_eq!(i.scale.unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(i.shift.unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(i.lower, bisect_quantile(0.025, 3.5, 7.5), epsilon = 1e-10);
        assert_abs_diff_eq!(i.upper, bisect_quantile(0.975, 3.5, 7.5), epsilon = 1e-10);
    }

    #[test]
    fn gold_shrinks_symmetrically_toward_half() {
        let i = jeffreys_adjusted_gold(&sample(100, 50, 25), 0.05).unwrap();
        let a = (50.0f64 * 50.0 / (100.0 * 49.0)).sqrt();
        let b = 0.5 * (1.0 - a);
        let lo = bisect_quantile(0.025, 25.5, 25.5);
        let hi = bisect_quantile(0.975, 25.5, 25.5);
        assert_abs_diff_eq!(i.lower, a * lo + b, epsilon = 1e-10);
        assert_abs_diff_eq!(i.upper, a * hi + b, epsilon = 1e-10);
        assert_abs_diff_eq!(0.5 * (i.lower + i.upper), 0.5, epsilon = 1e-10);
        assert!(i.width() < hi - lo);
    }

    #[test]
    fn credible_perfect_census() {
        for k in [0, 13, 40] {
            let s = sample(40, 40, k);
            let i = credible_misclass(&s, &TestKit::perfect(), 0.05).unwrap();
            let p = k as f64 / 40.0;
            assert_eq!((i.lower, i.upper), (p, p));
        }
    }

    #[test]
    fn credible_reduces_to_gold_for_perfect_test() {
        let s = sample(200, 60, 17);
        let c = credible_misclass(&s, &TestKit::perfect(), 0.05).unwrap();
        let g = jeffreys_adjusted_gold(&s, 0.05).unwrap();
        assert_abs_diff_eq!(c.lower, g.lower, epsilon = 1e-12);
        assert_abs_diff_eq!(c.upper, g.upper, epsilon = 1e-12);
    }

    #[test]
    fn credible_hand_composed() {
        let s = sample(500, 150, 40);
        let kit = TestKit::new(0.9, 0.95).unwrap();
        let i = credible_misclass(&s, &kit, 0.05).unwrap();

        let pi_hat: f64 = 40.0 / 150.0;
        let pi_c = (pi_hat - 0.05) / 0.85;
        let fpc = 150.0 * 350.0 / (500.0 * 149.0);
        let v1 = pi_hat * (1.0 - pi_hat) / 150.0;
        let v3 = fpc * v1 + (pi_c * 0.09 + (1.0 - pi_c) * 0.0475) / 500.0;
        let a = (v3 / v1).sqrt();
        let b = pi_hat * (1.0 - a);
        let lo = (a * bisect_quantile(0.025, 40.5, 110.5) + b - 0.05) / 0.85;
        let hi = (a * bisect_quantile(0.975, 40.5, 110.5) + b - 0.05) / 0.85;
        assert_abs_diff_eq!(i.scale.unwrap(), a, epsilon = 1e-12);
        assert_abs_diff_eq!(i.lower, lo, epsilon = 1e-10);
        assert_abs_diff_eq!(i.upper, hi, epsilon = 1e-10);
        assert!(i.contains(pi_c));
    }

    #[test]
    fn credible_degenerate_counts_are_finite() {
        let kit = TestKit::new(0.8, 0.85).unwrap();
        for (big_n, n, k) in [(100, 10, 0), (100, 10, 10), (50, 50, 0), (500, 2, 2)] {
            let i = credible_misclass(&sample(big_n, n, k), &kit, 0.05).unwrap();
            assert!(i.scale.unwrap().is_finite());
            assert!(0.0 <= i.lower && i.lower <= i.upper && i.upper <= 1.0);
        }
        let i = credible_misclass(&sample(100, 10, 0), &kit, 0.05).unwrap();
        assert_eq!(i.lower, 0.0);
        assert!(i.upper > 0.0);
    }
}
