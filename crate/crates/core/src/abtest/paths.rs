use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regression::{fit_glm, fit_ols, Family};
use crate::scalar::Scalar;
use crate::special::normal_cdf;

/// Path estimates of the mediation model with their standard errors.
///
/// `α̂` comes from `M ~ S + W`, `(β̂, γ̂)` from `Y ~ M + S + W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestStatistics<T> {
    pub alpha_hat: T,
    pub beta_hat: T,
    pub gamma_hat: T,
    pub se_alpha: T,
    pub se_beta: T,
    pub se_gamma: T,
    /// Estimated covariance of `β̂` and `γ̂` from the outcome fit.
    pub cov_beta_gamma: T,
    /// `α̂ / se(α̂)`.
    pub t_alpha: T,
    /// `β̂ / se(β̂)`.
    pub t_beta: T,
    pub n: usize,
}

impl<T: Scalar> TestStatistics<T> {
    pub fn indirect(&self) -> T {
        self.alpha_hat * self.beta_hat
    }

    pub fn total(&self) -> T {
        self.indirect() + self.gamma_hat
    }

    pub(crate) fn is_finite(&self) -> bool {
        [self.alpha_hat, self.beta_hat, self.gamma_hat]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Fits the mediator equation by least squares and the outcome equation
/// with the given family and its canonical link.
pub fn estimate_paths<T: Scalar>(data: &Dataset<T>, outcome: Family) -> Result<TestStatistics<T>> {
    let n = data.n();
    if n <= data.p() + 3 {
        return Err(Error::InsufficientData(format!(
            "path estimation needs n > p + 3 (n = {n}, p = {})",
            data.p()
        )));
    }
    let (alpha_hat, se_alpha) = mediator_path(data)?;
    let design = data.design_with(&[data.mediator(), data.exposure()]);
    let (coef, se, cov) = match outcome {
        Family::Gaussian => {
            let fit = fit_ols(&design, data.outcome())?;
            let cov = fit.covariance[(1, 2)];
            (fit.coefficients, fit.standard_errors, cov)
        }
        family => {
            let fit = fit_glm(&design, data.outcome(), family, family.canonical_link())?;
            let cov = fit.covariance[(1, 2)];
            (fit.coefficients, fit.standard_errors, cov)
        }
    };
    Ok(TestStatistics {
        alpha_hat,
        beta_hat: coef[1],
        gamma_hat: coef[2],
        se_alpha,
        se_beta: se[1],
        se_gamma: se[2],
        cov_beta_gamma: cov,
        t_alpha: alpha_hat / se_alpha,
        t_beta: coef[1] / se[1],
        n,
    })
}

/// `(α̂, se(α̂))` from the least-squares fit of `M ~ S + W`.
pub fn mediator_path<T: Scalar>(data: &Dataset<T>) -> Result<(T, T)> {
    let fit = fit_ols(&data.design_with(&[data.exposure()]), data.mediator())?;
    Ok((fit.coefficients[1], fit.standard_errors[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SobelTest {
    pub z: f64,
    pub p_value: f64,
}

pub(crate) fn two_sided_normal_p(z: f64) -> f64 {
    if z.is_nan() {
        return 1.0;
    }
    (2.0 * normal_cdf(-z.abs())).min(1.0)
}

fn ratio_test(num: f64, var: f64) -> SobelTest {
    if num == 0.0 {
        return SobelTest { z: 0.0, p_value: 1.0 };
    }
    let z = num / var.sqrt();
    SobelTest {
        z,
        p_value: two_sided_normal_p(z),
    }
}

/// Delta-method test of `αβ = 0`: `z = α̂β̂ / √(α̂² se_β² + β̂² se_α²)`.
/// A zero numerator gives `z = 0`, `p = 1`.
pub fn sobel_test<T: Scalar>(stats: &TestStatistics<T>) -> SobelTest {
    let (a, b) = (stats.alpha_hat.to_f64_lossy(), stats.beta_hat.to_f64_lossy());
    let (sa, sb) = (stats.se_alpha.to_f64_lossy(), stats.se_beta.to_f64_lossy());
    ratio_test(a * b, a * a * sb * sb + b * b * sa * sa)
}

/// Wald test of `γ = 0`.
pub(crate) fn direct_wald_test<T: Scalar>(stats: &TestStatistics<T>) -> SobelTest {
    let sg = stats.se_gamma.to_f64_lossy();
    ratio_test(stats.gamma_hat.to_f64_lossy(), sg * sg)
}

/// Delta-method test of `αβ + γ = 0`; `α̂` is independent of `(β̂, γ̂)`.
pub(crate) fn total_delta_test<T: Scalar>(stats: &TestStatistics<T>) -> SobelTest {
    let (a, b) = (stats.alpha_hat.to_f64_lossy(), stats.beta_hat.to_f64_lossy());
    let (sa, sb, sg) = (
        stats.se_alpha.to_f64_lossy(),
        stats.se_beta.to_f64_lossy(),
        stats.se_gamma.to_f64_lossy(),
    );
    let cov = stats.cov_beta_gamma.to_f64_lossy();
    let var = b * b * sa * sa + a * a * sb * sb + sg * sg + 2.0 * a * cov;
    ratio_test(a * b + stats.gamma_hat.to_f64_lossy(), var)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(a: f64, b: f64, sa: f64, sb: f64) -> TestStatistics<f64> {
        TestStatistics {
            alpha_hat: a,
            beta_hat: b,
            gamma_hat: 0.0,
            se_alpha: sa,
            se_beta: sb,
            se_gamma: 1.0,
            cov_beta_gamma: 0.0,
            t_alpha: a / sa,
            t_beta: b / sb,
            n: 100,
        }
    }

    #[test]
    fn sobel_degenerate_cases() {
        assert_eq!(sobel_test(&stats(0.0, 0.0, 0.1, 0.1)).p_value, 1.0);
        let s = sobel_test(&stats(1.0, 0.0, 0.1, 0.1));
        assert_eq!((s.z, s.p_value), (0.0, 1.0));
    }

    #[test]
    fn sobel_worked_example() {
        let s = sobel_test(&stats(0.5, 0.5, 0.05, 0.05));
        let z = 0.25 / (0.25_f64 * 0.0025 * 2.0).sqrt();
        assert!((s.z - z).abs() < 1e-12);
        assert!((s.z - 7.071).abs() < 1e-3);
        // 2 Φ(-5√2) from an arbitrary-precision evaluation
        assert!((s.p_value / 1.537_459_794_428_036e-12 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn noiseless_mediator() {
        let s: Vec<f64> = (0..20).map(|i| (i % 2) as f64).collect();
        let y: Vec<f64> = (0..20).map(|i| ((i * 7) % 5) as f64).collect();
        let d = Dataset::without_confounders(s.clone(), s, y).unwrap();
        let (a, se) = mediator_path(&d).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && se.abs() < 1e-12);
        // M = S exactly makes the outcome design rank deficient.
        let st = estimate_paths(&d, Family::Gaussian);
        assert!(matches!(st, Err(Error::SingularDesign { .. })));
    }
}
