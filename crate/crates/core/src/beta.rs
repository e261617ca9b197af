//! Beta distribution special functions.
//!
//! Log-gamma uses the Lanczos approximation (g = 7, nine terms). The
//! regularized incomplete beta `I_x(α, β)` is evaluated by its continued
//! fraction with the modified Lentz algorithm, after reducing to the side of
//! the mean where the fraction converges quickly. The quantile inverts the
//! CDF with Newton steps kept inside a shrinking bisection bracket.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

const CF_MAX_ITER: usize = 10_000;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

const NEWTON_STEPS: usize = 100;
const BISECTION_STEPS: usize = 1_100;

/// Shape parameters of a Beta distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    alpha: f64,
    beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite() {
            Ok(Self { alpha, beta })
        } else {
            Err(Error::Shape { alpha, beta })
        }
    }

    /// Jeffreys posterior `Beta(n⁺ + ½, n − n⁺ + ½)` for `positives` out of `trials`.
    pub fn jeffreys(positives: u64, trials: u64) -> Self {
        debug_assert!(positives <= trials);
        Self {
            alpha: positives as f64 + 0.5,
            beta: (trials - positives) as f64 + 0.5,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    fn swapped(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
        }
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection: Γ(x)Γ(1−x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut series = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        series += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + series.ln()
}

pub fn ln_beta(p: &BetaParams) -> f64 {
    ln_gamma(p.alpha) + ln_gamma(p.beta) - ln_gamma(p.alpha + p.beta)
}

/// Density; infinite at an endpoint whose shape is below one.
pub fn pdf(x: f64, p: &BetaParams) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    if x == 0.0 || x == 1.0 {
        let shape = if x == 0.0 { p.alpha } else { p.beta };
        return if shape < 1.0 {
            f64::INFINITY
        } else if shape > 1.0 {
            0.0
        } else {
            (-ln_beta(p)).exp()
        };
    }
    ((p.alpha - 1.0) * x.ln() + (p.beta - 1.0) * (-x).ln_1p() - ln_beta(p)).exp()
}

/// Regularized incomplete beta `I_x(α, β)`.
pub fn cdf(x: f64, p: &BetaParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            name: "x",
            value: x,
        });
    }
    Ok(regularized_incomplete_beta(x, p))
}

fn regularized_incomplete_beta(x: f64, p: &BetaParams) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    if x > (p.alpha + 1.0) / (p.alpha + p.beta + 2.0) {
        1.0 - lentz(1.0 - x, &p.swapped())
    } else {
        lentz(x, p)
    }
}

/// Continued fraction for `I_x(a, b)`, valid (fast) for `x < (a+1)/(a+b+2)`.
fn lentz(x: f64, p: &BetaParams) -> f64 {
    let (a, b) = (p.alpha, p.beta);
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(p);
    let front = ln_front.exp() / a;

    let clamp = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };

    let mut c = 1.0;
    let mut d = 1.0 / clamp(1.0 - (a + b) * x / (a + 1.0));
    let mut f = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let even = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
        d = 1.0 / clamp(1.0 + even * d);
        c = clamp(1.0 + even / c);
        f *= d * c;

        let odd = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
        d = 1.0 / clamp(1.0 + odd * d);
        c = clamp(1.0 + odd / c);
        let delta = d * c;
        f *= delta;

        if (delta - 1.0).abs() < CF_EPS {
            break;
        }
    }
    front * f
}

/// Inverse of [`cdf`]: the `q`-quantile of `Beta(α, β)`.
pub fn quantile(q: f64, p: &BetaParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain {
            name: "q",
            value: q,
        });
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    if q == 1.0 {
        return Ok(1.0);
    }
    Ok(invert_cdf(q, p))
}

fn invert_cdf(q: f64, p: &BetaParams) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = p.mean();
    // Attained target: a few ulps of the CDF value itself.
    let tol = 4.0 * f64::EPSILON * q.min(1.0 - q).max(f64::MIN_POSITIVE);

    for _ in 0..NEWTON_STEPS {
        let f = regularized_incomplete_beta(x, p) - q;
        if f.abs() <= tol {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let density = pdf(x, p);
        let step = f / density;
        let next = x - step;
        if !(next > lo && next < hi) || !step.is_finite() {
            x = 0.5 * (lo + hi);
        } else {
            if (next - x).abs() <= 2.0 * f64::EPSILON * x {
                return next;
            }
            x = next;
        }
        if hi - lo <= f64::EPSILON * hi {
            return x;
        }
    }

    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = regularized_incomplete_beta(mid, p) - q;
        if f.abs() <= tol {
            return mid;
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
