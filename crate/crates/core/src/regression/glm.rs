use serde::Serialize;

use super::family::{Family, Link};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Qr};
use crate::scalar::Scalar;

/// IRLS stopping rule.
#[derive(Debug, Clone, Copy)]
pub struct IrlsOptions {
    /// Relative deviance change `|D_k - D_{k-1}| / (|D_k| + 0.1)`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlmFit<T> {
    pub coefficients: Vec<T>,
    pub standard_errors: Vec<T>,
    pub family: Family,
    pub link: Link,
    /// Pearson estimate for the gaussian family, 1 otherwise.
    pub dispersion: T,
    /// `φ (XᵀWX)⁻¹` at the solution.
    pub covariance: Matrix<T>,
    pub converged: bool,
    pub iterations: usize,
    pub deviance: T,
    /// Deviance after each IRLS update.
    pub deviance_trace: Vec<T>,
    pub fitted: Vec<T>,
}

pub fn fit_glm<T: Scalar>(
    design: &Matrix<T>,
    response: &[T],
    family: Family,
    link: Link,
) -> Result<GlmFit<T>> {
    fit_glm_with(design, response, family, link, IrlsOptions::default())
}

pub fn fit_glm_with<T: Scalar>(
    design: &Matrix<T>,
    y: &[T],
    family: Family,
    link: Link,
    opts: IrlsOptions,
) -> Result<GlmFit<T>> {
    let (n, q) = (design.rows(), design.cols());
    if y.len() != n {
        return Err(Error::InvalidInput(format!(
            "response length {} does not match {n} design rows",
            y.len()
        )));
    }
    if n <= q {
        return Err(Error::InsufficientData(format!(
            "GLM needs more rows than columns (n = {n}, q = {q})"
        )));
    }
    family.check_link(link)?;
    family.check_response(y)?;

    let eta_of = |beta: &[T]| design.matvec(beta);
    let mu_of = |eta: &[T]| eta.iter().map(|&e| link.inverse(e)).collect::<Vec<T>>();

    let mut eta: Vec<T> = y.iter().map(|&v| link.link(family.initial_mean(v))).collect();
    let mut mu = mu_of(&eta);
    let mut dev = T::infinity();
    let mut trace = Vec::new();
    let mut beta = vec![T::zero(); q];
    let mut converged = false;
    let mut iterations = 0;
    let tol = T::lit(opts.tolerance);

    while iterations < opts.max_iterations {
        iterations += 1;
        let (wx, wz) = working_system(design, y, &eta, &mu, family, link);
        let mut step = Qr::new(&wx).solve(&wz)?;
        let mut new_eta = eta_of(&step);
        let mut new_mu = mu_of(&new_eta);
        let mut new_dev = family.deviance(y, &new_mu);
        if iterations > 1 {
            // Step halving keeps the deviance sequence monotone.
            let mut halvings = 0;
            while (!new_dev.is_finite() || new_dev > dev) && halvings < 40 {
                halvings += 1;
                step = step
                    .iter()
                    .zip(&beta)
                    .map(|(&s, &b)| (s + b) * T::half())
                    .collect();
                new_eta = eta_of(&step);
                new_mu = mu_of(&new_eta);
                new_dev = family.deviance(y, &new_mu);
            }
            if !new_dev.is_finite() || new_dev > dev {
                step = beta.clone();
                new_eta = eta.clone();
                new_mu = mu.clone();
                new_dev = dev;
            }
        }
        if !new_dev.is_finite() {
            return Err(Error::NonConvergence {
                iterations,
                last_iterate: step.iter().map(|v| v.to_f64_lossy()).collect(),
            });
        }
        let change = if dev.is_finite() {
            (new_dev - dev).abs() / (new_dev.abs() + T::lit(0.1))
        } else {
            T::infinity()
        };
        beta = step;
        eta = new_eta;
        mu = new_mu;
        dev = new_dev;
        trace.push(dev);
        if change < tol {
            converged = true;
            break;
        }
    }

    let last_iterate = || beta.iter().map(|v| v.to_f64_lossy()).collect::<Vec<f64>>();
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            last_iterate: last_iterate(),
        });
    }
    if family == Family::Bernoulli {
        let edge = T::lit(1e-10);
        if mu.iter().any(|&m| m < edge || m > T::one() - edge) {
            return Err(Error::NonConvergence {
                iterations,
                last_iterate: last_iterate(),
            });
        }
    }

    let dispersion = match family {
        Family::Gaussian => {
            y.iter().zip(&mu).map(|(&a, &b)| (a - b) * (a - b)).sum::<T>()
                / T::from_usize_lossy(n - q)
        }
        _ => T::one(),
    };
    let (wx, _) = working_system(design, y, &eta, &mu, family, link);
    let qr = Qr::new(&wx);
    let inv = qr.gram_inverse()?;
    let standard_errors = (0..q).map(|j| (dispersion * inv[(j, j)]).sqrt()).collect();

    Ok(GlmFit {
        coefficients: beta,
        standard_errors,
        family,
        link,
        dispersion,
        covariance: super::ols::scaled(&inv, dispersion),
        converged,
        iterations,
        deviance: dev,
        deviance_trace: trace,
        fitted: mu,
    })
}

/// Rows of `sqrt(W) X` and `sqrt(W) z` for the current iterate.
fn working_system<T: Scalar>(
    design: &Matrix<T>,
    y: &[T],
    eta: &[T],
    mu: &[T],
    family: Family,
    link: Link,
) -> (Matrix<T>, Vec<T>) {
    let (n, q) = (design.rows(), design.cols());
    let mut wx = Matrix::zeros(n, q);
    let mut wz = vec![T::zero(); n];
    let floor = T::lit(1e-300).max(T::min_positive_value());
    for i in 0..n {
        let d = link.mu_eta(eta[i]).max(floor);
        let var = family.variance(mu[i]).max(floor);
        let w = (d * d / var).sqrt();
        let z = eta[i] + (y[i] - mu[i]) / d;
        for j in 0..q {
            wx[(i, j)] = design[(i, j)] * w;
        }
        wz[i] = z * w;
    }
    (wx, wz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::fit_ols;

    fn intercept(n: usize) -> Matrix<f64> {
        Matrix::from_rows(&vec![vec![1.0]; n]).unwrap()
    }

    #[test]
    fn bernoulli_intercept_matches_logit_of_mean() {
        let y = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
        let fit = fit_glm(&intercept(8), &y, Family::Bernoulli, Link::Logit).unwrap();
        assert!((fit.coefficients[0] - (1.0_f64 / 3.0).ln()).abs() < 1e-9);
        assert!(fit.converged);
    }

    #[test]
    fn poisson_intercept_matches_log_of_mean() {
        let y = [2.0, 6.0, 4.0, 3.0, 5.0];
        let fit = fit_glm(&intercept(5), &y, Family::Poisson, Link::Log).unwrap();
        assert!((fit.coefficients[0] - 4.0_f64.ln()).abs() < 1e-9);
        assert_eq!(fit.dispersion, 1.0);
    }

    #[test]
    fn gaussian_identity_equals_ols() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![1.0, (i as f64).sin(), (i as f64 * 0.3).cos()]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = (0..20).map(|i| 0.5 + (i as f64 * 1.7).sin()).collect();
        let glm = fit_glm(&x, &y, Family::Gaussian, Link::Identity).unwrap();
        let ols = fit_ols(&x, &y).unwrap();
        for (a, b) in glm.coefficients.iter().zip(&ols.coefficients) {
            assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in glm.standard_errors.iter().zip(&ols.standard_errors) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_values_outside_support() {
        let x = intercept(3);
        assert!(matches!(fit_glm(&x, &[0.0, 2.0, 1.0], Family::Bernoulli, Link::Logit), Err(Error::InvalidInput(_))));
        assert!(matches!(fit_glm(&x, &[0.0, 1.5, 1.0], Family::Poisson, Link::Log), Err(Error::InvalidInput(_))));
        assert!(matches!(fit_glm(&x, &[0.0, 1.0, 1.0], Family::Poisson, Link::Identity), Err(Error::UnsupportedModel(_))));
    }

    #[test]
    fn separation_reports_non_convergence() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = (0..10).map(|i| if i < 5 { 0.0 } else { 1.0 }).collect();
        match fit_glm(&x, &y, Family::Bernoulli, Link::Logit) {
            Err(Error::NonConvergence { last_iterate, .. }) => assert_eq!(last_iterate.len(), 2),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
