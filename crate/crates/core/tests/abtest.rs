mod common;

use medpath::abtest::{
    ab_draws, ab_indicators, ab_statistic, ab_test, bootstrap_paths, bootstrap_tests, classical_bootstrap_test,
    estimate_paths, sobel_report, AbConfig, Method, Scale, SingularTerm,
};
use medpath::data::Dataset;
use medpath::regression::Family;
use medpath::simlab::{generate_scenario_data, Scenario};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn scenario_data(alpha: f64, beta: f64, n: usize, seed: u64) -> Dataset<f64> {
    let s = Scenario { n, ..Scenario::default() }.with_paths(alpha, beta);
    generate_scenario_data(&s, seed).unwrap()
}

fn config(b: usize, seed: u64) -> AbConfig {
    AbConfig { b, seed, ..AbConfig::default() }
}

#[test]
fn paths_recovered_at_default_design() {
    let d = scenario_data(0.5, 0.5, 500, 3);
    let st = estimate_paths(&d, Family::Gaussian).unwrap();
    assert!((st.alpha_hat - 0.5).abs() < 3.0 * st.se_alpha);
    assert!((st.beta_hat - 0.5).abs() < 3.0 * st.se_beta);
    assert!((st.gamma_hat - 1.0).abs() < 3.0 * st.se_gamma);
    assert_eq!(st.t_alpha.signum(), st.alpha_hat.signum());
    assert!((st.t_beta - st.beta_hat / st.se_beta).abs() < 1e-12);
}

#[test]
fn single_precision_paths_agree_with_double() {
    let d = scenario_data(0.5, 0.5, 300, 4);
    let d32 = Dataset::<f32>::without_confounders(
        d.exposure().iter().map(|&v| v as f32).collect(),
        d.mediator().iter().map(|&v| v as f32).collect(),
        d.outcome().iter().map(|&v| v as f32).collect(),
    )
    .unwrap();
    let d64 = Dataset::without_confounders(d.exposure().to_vec(), d.mediator().to_vec(), d.outcome().to_vec()).unwrap();
    let a = estimate_paths(&d32, Family::Gaussian).unwrap();
    let b = estimate_paths(&d64, Family::Gaussian).unwrap();
    assert!((a.alpha_hat as f64 - b.alpha_hat).abs() < 1e-4);
    assert!((a.beta_hat as f64 - b.beta_hat).abs() < 1e-4);
}

#[test]
fn reports_are_deterministic_and_bounded() {
    let d = scenario_data(0.2, 0.3, 200, 5);
    let c = config(99, 11);
    let a = ab_test(&d, Family::Gaussian, &c).unwrap();
    assert_eq!(a, ab_test(&d, Family::Gaussian, &c).unwrap());
    let k = classical_bootstrap_test(&d, Family::Gaussian, &c).unwrap();
    for r in [&a, &k] {
        for p in [r.p_value_nie, r.p_value_nde, r.p_value_nte] {
            assert!((1.0 / 100.0..=1.0).contains(&p), "{p}");
        }
        assert_eq!(r.nte, r.nie + r.nde);
        assert_eq!((r.n, r.b, r.seed, r.scale), (200, 99, 11, Scale::Natural));
    }
    assert_eq!(a.method, Method::AdaptiveBootstrap);
    assert_eq!(a.lambda, Some(2.0));
    assert_eq!(k.lambda, None);
}

#[test]
fn contrast_scales_effects() {
    let d = scenario_data(0.5, 0.5, 200, 6);
    let st = estimate_paths(&d, Family::Gaussian).unwrap();
    let r = ab_test(&d, Family::Gaussian, &AbConfig { s: 3.0, s_star: 1.0, ..config(19, 1) }).unwrap();
    assert!((r.nie - 2.0 * st.alpha_hat * st.beta_hat).abs() < 1e-12);
    assert!((r.nde - 2.0 * st.gamma_hat).abs() < 1e-12);
}

#[test]
fn strong_signal_adaptive_equals_classical() {
    let d = scenario_data(0.5, 0.5, 500, 7);
    let r = bootstrap_tests(&d, Family::Gaussian, &config(199, 8)).unwrap();
    assert!(r.draws.iter().all(|x| !(x.indicator_alpha && x.indicator_beta)));
    assert_eq!(r.adaptive.p_value_nie, r.classical.p_value_nie);
    assert_eq!(r.adaptive.p_value_nde, r.classical.p_value_nde);
    assert!(r.classical.p_value_nie < 0.05);
}

#[test]
fn decomposition_terms_are_exclusive() {
    let d = scenario_data(0.0, 0.0, 200, 9);
    let c = config(199, 10);
    let st = estimate_paths(&d, Family::Gaussian).unwrap();
    let sample = bootstrap_paths(&d, Family::Gaussian, c.b, c.seed).unwrap();
    for x in ab_draws(&st, &sample, &c) {
        let both = x.indicator_alpha && x.indicator_beta;
        let expected = if both {
            x.alpha_star * x.beta_star
        } else {
            x.alpha_star * x.beta_star - st.alpha_hat * st.beta_hat
        };
        assert_eq!(x.u, expected);
        assert_eq!(x.indicator_alpha, ab_indicators(st.t_alpha, x.t_alpha_star, 2.0));
    }
}

#[test]
fn centred_variant_changes_only_the_singular_branch() {
    let d = scenario_data(0.0, 0.0, 200, 12);
    let c = config(99, 13);
    let st = estimate_paths(&d, Family::Gaussian).unwrap();
    let sample = bootstrap_paths(&d, Family::Gaussian, c.b, c.seed).unwrap();
    let plain = ab_draws(&st, &sample, &c);
    let centred = ab_draws(&st, &sample, &AbConfig { singular_term: SingularTerm::CenteredProduct, ..c });
    for (p, q) in plain.iter().zip(&centred) {
        if p.indicator_alpha && p.indicator_beta {
            assert_eq!(q.u, (p.alpha_star - st.alpha_hat) * (p.beta_star - st.beta_hat));
        } else {
            assert_eq!(p.u, q.u);
        }
    }
}

#[test]
fn bernoulli_outcome_is_reported_on_link_scale() {
    let base = scenario_data(0.5, 0.0, 400, 14);
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let y: Vec<f64> = base
        .mediator()
        .iter()
        .zip(base.exposure())
        .map(|(&m, &s)| {
            let p = 1.0 / (1.0 + (-(-0.5 + 0.4 * m + 0.3 * s)).exp());
            if rng.random::<f64>() < p { 1.0 } else { 0.0 }
        })
        .collect();
    let d = Dataset::without_confounders(base.exposure().to_vec(), base.mediator().to_vec(), y).unwrap();
    let r = ab_test(&d, Family::Bernoulli, &config(49, 1)).unwrap();
    assert_eq!(r.scale, Scale::Link);
    let st = estimate_paths(&d, Family::Bernoulli).unwrap();
    assert!((st.beta_hat - 0.4).abs() < 4.0 * st.se_beta);
}

#[test]
fn sobel_report_has_zero_replicates() {
    let d = scenario_data(0.5, 0.5, 300, 16);
    let r = sobel_report(&d, Family::Gaussian, 1.0, 0.0).unwrap();
    assert_eq!((r.method, r.b, r.lambda), (Method::Sobel, 0, None));
    assert!(r.p_value_nie < 1e-6 && r.p_value_nte < 1e-6);
}

#[test]
fn small_bootstrap_rejected() {
    let d = scenario_data(0.5, 0.5, 100, 17);
    assert!(ab_test(&d, Family::Gaussian, &config(18, 0)).is_err());
}

#[test]
fn classical_bootstrap_is_conservative_at_the_singular_null() {
    let mut rejections = 0;
    let reps = 200;
    for r in 0..reps {
        let d = scenario_data(0.0, 0.0, 200, 1_000 + r);
        let rep = classical_bootstrap_test(&d, Family::Gaussian, &config(99, r)).unwrap();
        if rep.p_value_nie <= 0.05 {
            rejections += 1;
        }
    }
    assert!(rejections as f64 / reps as f64 <= 0.05, "{rejections}");
}

#[test]
fn nonnull_product_is_asymptotically_normal_with_delta_variance() {
    // M = S + e, Y = M + e with unit-variance S and errors: σ_α² = Var(e_M)/Var(S) = 1,
    // σ_β² = Var(e_Y)/Var(M | S) = 1.
    let (n, reps) = (1000, 1500);
    let vals: Vec<f64> = (0..reps)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(40_000 + r);
            let mut z = || -> f64 { rng.sample(StandardNormal) };
            let s: Vec<f64> = (0..n).map(|_| z()).collect();
            let m: Vec<f64> = s.iter().map(|&v| v + z()).collect();
            let y: Vec<f64> = m.iter().map(|&v| v + z()).collect();
            let st = estimate_paths(&Dataset::without_confounders(s, m, y).unwrap(), Family::Gaussian).unwrap();
            (n as f64).sqrt() * (st.alpha_hat * st.beta_hat - 1.0)
        })
        .collect();
    let mean = common::mean(&vals);
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let want = 1.0 * 1.0 + 1.0 * 1.0;
    assert!((var / want - 1.0).abs() < 0.1, "{var}");
}

proptest! {
    #[test]
    fn indicator_requires_both_statistics_small(t in -5.0..5.0f64, ts in -5.0..5.0f64, l in 0.1..4.0f64) {
        prop_assert_eq!(ab_indicators(t, ts, l), t.abs() <= l && ts.abs() <= l);
    }

    #[test]
    fn statistic_switches_on_indicator_product(
        a in -1.0..1.0f64, b in -1.0..1.0f64, ah in -1.0..1.0f64, bh in -1.0..1.0f64,
        ia: bool, ib: bool,
    ) {
        let u = ab_statistic(a, b, ah, bh, ia, ib);
        let regular = a * b - ah * bh;
        let singular = a * b;
        let expected = if ia && ib { singular } else { regular };
        prop_assert_eq!(u, expected);
    }
}
