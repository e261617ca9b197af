mod common;

use common::*;
use prevkit::beta::{self, BetaParams};
use prevkit::estimators::{var_total, SampleSummary};
use prevkit::intervals::{credible_misclass, jeffreys_adjusted_gold, wald_ci};
use prevkit::{estimate, TestKit};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

const SHAPES: [(f64, f64); 5] = [
    (0.5, 0.5),
    (3.5, 7.5),
    (40.5, 110.5),
    (500.0, 500.0),
    (2.0, 3.0),
];

#[test]
fn quadrature_mean_matches_closed_form() {
    for (a, b) in SHAPES {
        let p = BetaParams::new(a, b).unwrap();
        let m = beta_mean_quadrature(a, b, 20_000);
        assert!(
            (m - p.mean()).abs() < 1e-8,
            "({a}, {b}): {m} vs {}",
            p.mean()
        );
    }
}

#[test]
fn cdf_agrees_with_quadrature() {
    for (a, b) in SHAPES {
        let p = BetaParams::new(a, b).unwrap();
        for q in [0.001, 0.025, 0.3, 0.5, 0.8, 0.975, 0.999] {
            let x = beta::quantile(q, &p).unwrap();
            let reference = beta_cdf_quadrature(x, a, b, 40_000);
            let got = beta::cdf(x, &p).unwrap();
            assert!(
                (got - reference).abs() < 1e-9,
                "({a}, {b}) at {x}: {got} vs {reference}"
            );
        }
    }
}

#[test]
fn quantile_round_trip_and_bisection() {
    for (a, b) in SHAPES {
        let p = BetaParams::new(a, b).unwrap();
        for q in probability_grid(21) {
            let x = beta::quantile(q, &p).unwrap();
            let back = beta::cdf(x, &p).unwrap();
            assert!(
                (back - q).abs() <= 1e-10,
                "({a}, {b}) q = {q}: cdf = {back}"
            );
            let oracle = bisect(|t| beta::cdf(t, &p).unwrap(), q);
            assert!(
                (x - oracle).abs() <= 1e-9 * oracle.max(1e-3),
                "({a}, {b}) q = {q}"
            );
        }
    }
}

/// Endpoints commute with the affine map: draws pushed through it hit each
/// tail with the nominal frequency.
#[test]
fn credible_endpoints_match_transformed_posterior_draws() {
    let s = SampleSummary::new(500, 150, 40).unwrap();
    let kit = TestKit::new(0.9, 0.95).unwrap();
    let alpha = 0.05;
    let ci = credible_misclass(&s, &kit, alpha).unwrap();

    let est = estimate(&s, &kit);
    let v = var_total(est.pi_hat, est.pi_c_hat, &s, &kit);
    let a = (v.v3 / v.v1).sqrt();
    let b = est.pi_hat * (1.0 - a);
    let post = Beta::new(40.5, 110.5).unwrap();

    let draws = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (mut below, mut above) = (0u64, 0u64);
    for _ in 0..draws {
        let p: f64 = post.sample(&mut rng);
        let t = kit.correct(a * p + b).clamp(0.0, 1.0);
        if t < ci.lower {
            below += 1;
        }
        if t > ci.upper {
            above += 1;
        }
    }
    let mc_se = (0.025 * 0.975 / draws as f64).sqrt();
    for tail in [below, above] {
        let frac = tail as f64 / draws as f64;
        assert!((frac - 0.025).abs() <= 3.0 * mc_se, "tail mass {frac}");
    }
}

fn sample_strategy() -> impl Strategy<Value = SampleSummary> {
    (2u64..400)
        .prop_flat_map(|n| (Just(n), n..=3000u64, 0..=n))
        .prop_map(|(n, population, k)| SampleSummary::new(population, n, k).unwrap())
}

fn kit_strategy() -> impl Strategy<Value = TestKit> {
    (0.5f64..=1.0, 0.5f64..=1.0)
        .prop_filter("informative", |(se, sp)| se + sp > 1.0 + 1e-3)
        .prop_map(|(se, sp)| TestKit::new(se, sp).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn intervals_are_ordered_and_clipped(s in sample_strategy(), kit in kit_strategy(), alpha in 0.001f64..0.5) {
        let est = estimate(&s, &kit);
        for ci in [
            wald_ci(est.pi_c_hat, est.se_pi_c, alpha).unwrap(),
            jeffreys_adjusted_gold(&s, alpha).unwrap(),
            credible_misclass(&s, &kit, alpha).unwrap(),
        ] {
            prop_assert!(0.0 <= ci.lower && ci.lower <= ci.upper && ci.upper <= 1.0);
            prop_assert!((ci.nominal_level - (1.0 - alpha)).abs() < 1e-15);
        }
    }

    #[test]
    fn higher_level_nests_lower(s in sample_strategy(), kit in kit_strategy(), a1 in 0.001f64..0.5, a2 in 0.001f64..0.5) {
        let (wide, narrow) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let est = estimate(&s, &kit);
        let pairs = [
            (wald_ci(est.pi_c_hat, est.se_pi_c, wide).unwrap(), wald_ci(est.pi_c_hat, est.se_pi_c, narrow).unwrap()),
            (jeffreys_adjusted_gold(&s, wide).unwrap(), jeffreys_adjusted_gold(&s, narrow).unwrap()),
            (credible_misclass(&s, &kit, wide).unwrap(), credible_misclass(&s, &kit, narrow).unwrap()),
        ];
        for (w, n) in pairs {
            prop_assert!(w.lower <= n.lower + 1e-12 && n.upper <= w.upper + 1e-12,
                "[{}, {}] does not contain [{}, {}]", w.lower, w.upper, n.lower, n.upper);
        }
    }

    #[test]
    fn perfect_test_credible_equals_gold(s in sample_strategy(), alpha in 0.001f64..0.5) {
        prop_assume!(s.positives() > 0 && s.positives() < s.sample_size());
        let gold = jeffreys_adjusted_gold(&s, alpha).unwrap();
        let cred = credible_misclass(&s, &TestKit::perfect(), alpha).unwrap();
        prop_assert!((gold.lower - cred.lower).abs() <= 1e-12);
        prop_assert!((gold.upper - cred.upper).abs() <= 1e-12);
    }
}
