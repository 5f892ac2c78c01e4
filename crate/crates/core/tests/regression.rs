use medpath::linalg::Matrix;
use medpath::regression::{fit_glm, fit_ols, Family, Link};
use medpath::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

fn design(n: usize, seed: u64) -> (Matrix<f64>, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Vec::with_capacity(3 * n);
    for _ in 0..n {
        v.extend([1.0, rng.sample(StandardNormal), rng.sample(StandardNormal)]);
    }
    (Matrix::from_row_major(n, 3, v).unwrap(), rng)
}

#[test]
fn poisson_glm_recovers_coefficients() {
    let (x, mut rng) = design(5000, 1);
    let beta = [0.3, 0.5, -0.2];
    let y: Vec<f64> = (0..5000)
        .map(|i| {
            let eta: f64 = x.row(i).iter().zip(beta).map(|(a, b)| a * b).sum();
            Poisson::new(eta.exp()).unwrap().sample(&mut rng)
        })
        .collect();
    let fit = fit_glm(&x, &y, Family::Poisson, Link::Log).unwrap();
    assert!(fit.converged);
    for k in 0..3 {
        assert!((fit.coefficients[k] - beta[k]).abs() < 4.0 * fit.standard_errors[k]);
    }
    assert!(fit.deviance_trace.windows(2).all(|w| w[1] <= w[0] + 1e-9));
}

#[test]
fn rank_deficient_design_is_reported() {
    let x = Matrix::from_columns(&[&[1.0, 1.0, 1.0, 1.0], &[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0, 8.0]]).unwrap();
    assert!(matches!(fit_ols(&x, &[1.0, 2.0, 3.0, 5.0]), Err(Error::SingularDesign { .. })));
}

proptest! {
    #[test]
    fn ols_residuals_are_orthogonal_to_design(seed in 0u64..1000, noise in 0.1..3.0f64) {
        let (x, mut rng) = design(40, seed);
        let y: Vec<f64> = (0..40).map(|i| x[(i, 1)] - 2.0 * x[(i, 2)] + noise * rng.sample::<f64, _>(StandardNormal)).collect();
        let fit = fit_ols(&x, &y).unwrap();
        for g in x.tmatvec(&fit.residuals) {
            prop_assert!(g.abs() < 1e-9);
        }
        prop_assert_eq!(fit.design_rank, 3);
    }

    #[test]
    fn gaussian_glm_equals_ols(seed in 0u64..1000) {
        let (x, mut rng) = design(30, seed);
        let y: Vec<f64> = (0..30).map(|_| rng.sample(StandardNormal)).collect();
        let a = fit_ols(&x, &y).unwrap();
        let b = fit_glm(&x, &y, Family::Gaussian, Link::Identity).unwrap();
        for k in 0..3 {
            prop_assert!((a.coefficients[k] - b.coefficients[k]).abs() < 1e-9);
        }
    }
}
