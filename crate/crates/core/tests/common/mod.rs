//! Exact enumeration and quadrature oracles shared by the integration tests.
//! Nothing here calls into the library's own distribution code.
#![allow(dead_code)]

/// Binomial pmf over `0..=n`, built by the multiplicative recurrence.
pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    if p <= 0.0 {
        let mut v = vec![0.0; n as usize + 1];
        v[0] = 1.0;
        return v;
    }
    if p >= 1.0 {
        let mut v = vec![0.0; n as usize + 1];
        v[n as usize] = 1.0;
        return v;
    }
    (0..=n)
        .map(|k| choose(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32))
        .collect()
}

pub fn choose(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Hypergeometric pmf over `0..=n` (marked units in a draw of `n` from `N` with `K` marked).
pub fn hypergeometric_pmf(population: u64, marked: u64, n: u64) -> Vec<f64> {
    let total = choose(population, n);
    (0..=n)
        .map(|k| {
            if k > marked || n - k > population - marked {
                0.0
            } else {
                choose(marked, k) * choose(population - marked, n - k) / total
            }
        })
        .collect()
}

pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Distribution of the would-be test-positive count in the whole population.
pub fn population_positive_pmf(population: u64, cases: u64, se: f64, sp: f64) -> Vec<f64> {
    convolve(
        &binomial_pmf(cases, se),
        &binomial_pmf(population - cases, 1.0 - sp),
    )
}

/// n⁺ when the whole population is screened first and then sampled.
pub fn test_then_sample_pmf(population: u64, cases: u64, n: u64, se: f64, sp: f64) -> Vec<f64> {
    let mut out = vec![0.0; n as usize + 1];
    for (m, w) in population_positive_pmf(population, cases, se, sp)
        .into_iter()
        .enumerate()
    {
        if w == 0.0 {
            continue;
        }
        for (k, h) in hypergeometric_pmf(population, m as u64, n)
            .into_iter()
            .enumerate()
        {
            out[k] += w * h;
        }
    }
    out
}

/// n⁺ when only the sampled units are screened.
pub fn sample_then_test_pmf(population: u64, cases: u64, n: u64, se: f64, sp: f64) -> Vec<f64> {
    let mut out = vec![0.0; n as usize + 1];
    for (k, h) in hypergeometric_pmf(population, cases, n)
        .into_iter()
        .enumerate()
    {
        if h == 0.0 {
            continue;
        }
        let k = k as u64;
        let positives = convolve(&binomial_pmf(k, se), &binomial_pmf(n - k, 1.0 - sp));
        for (j, w) in positives.into_iter().enumerate() {
            out[j] += h * w;
        }
    }
    out
}

pub fn moments(pmf: &[f64]) -> (f64, f64) {
    let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    let var = pmf
        .iter()
        .enumerate()
        .map(|(k, p)| (k as f64 - mean).powi(2) * p)
        .sum();
    (mean, var)
}

/// Pearson statistic and degrees of freedom; cells with expected count below
/// five are pooled into their neighbours.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> (f64, usize) {
    let total: u64 = counts.iter().sum();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (c, p) in counts.iter().zip(probs) {
        obs += *c as f64;
        exp += p * total as f64;
        if exp >= 5.0 {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if let Some(last) = bins.last_mut() {
        last.0 += obs;
        last.1 += exp;
    }
    let stat = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    (stat, bins.len().saturating_sub(1))
}

/// Upper 0.1% point of chi-square with `df` degrees of freedom (Wilson–Hilferty).
pub fn chi_square_critical_999(df: usize) -> f64 {
    let z = 3.090_232_306_167_813;
    let d = df as f64;
    let c = 2.0 / (9.0 * d);
    d * (1.0 - c + z * c.sqrt()).powi(3)
}

/// Smallest `x` in [0, 1] with `f(x) ≥ q`, for nondecreasing `f`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, q: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Beta integrand in θ after `x = sin²θ`, scaled to peak near 1.
fn beta_kernel_theta(theta: f64, a: f64, b: f64, shift: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let term = |e: f64, v: f64| if e == 0.0 { 0.0 } else { e * v.ln() };
    2.0 * (term(2.0 * a - 1.0, s) + term(2.0 * b - 1.0, c) - shift).exp()
}

fn simpson<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, intervals: usize) -> f64 {
    let m = intervals + intervals % 2;
    let h = (hi - lo) / m as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

fn log_kernel_peak(a: f64, b: f64) -> f64 {
    // maximum of (2a−1) ln sinθ + (2b−1) ln cosθ for a, b ≥ ½
    let e1 = 2.0 * a - 1.0;
    let e2 = 2.0 * b - 1.0;
    if e1 + e2 == 0.0 {
        return 0.0;
    }
    let s2 = e1 / (e1 + e2);
    let term = |e: f64, v: f64| if e == 0.0 { 0.0 } else { 0.5 * e * v.ln() };
    term(e1, s2) + term(e2, 1.0 - s2)
}

/// Regularized incomplete beta by Simpson quadrature, normalizing constant included.
pub fn beta_cdf_quadrature(x: f64, a: f64, b: f64, intervals: usize) -> f64 {
    let shift = log_kernel_peak(a, b);
    let f = |t: f64| beta_kernel_theta(t, a, b, shift);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let theta = x.sqrt().asin();
    let part = simpson(f, 0.0, theta, intervals);
    let rest = simpson(f, theta, half_pi, intervals);
    part / (part + rest)
}

/// Mean of Beta(a, b) by quadrature: ∫x·k(x)dx / ∫k(x)dx.
pub fn beta_mean_quadrature(a: f64, b: f64, intervals: usize) -> f64 {
    let shift = log_kernel_peak(a, b);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let num = simpson(
        |t| t.sin().powi(2) * beta_kernel_theta(t, a, b, shift),
        0.0,
        half_pi,
        intervals,
    );
    let den = simpson(
        |t| beta_kernel_theta(t, a, b, shift),
        0.0,
        half_pi,
        intervals,
    );
    num / den
}

/// `points` probabilities from `10⁻⁶` to `1 − 10⁻⁶`, log-spaced in each tail
/// and symmetric about ½.
pub fn probability_grid(points: usize) -> Vec<f64> {
    assert!(points % 2 == 1 && points >= 3);
    let half = points / 2;
    let span = 6.0 - 2f64.log10();
    let lower: Vec<f64> = (0..half)
        .map(|i| 10f64.powf(-6.0 + span * i as f64 / half as f64))
        .collect();
    let mut grid = lower.clone();
    grid.push(0.5);
    grid.extend(lower.iter().rev().map(|q| 1.0 - q));
    grid
}
