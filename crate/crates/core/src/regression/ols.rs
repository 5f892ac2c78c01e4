use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Qr};
use crate::scalar::Scalar;

/// Ordinary least squares estimates with classical standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearFit<T> {
    pub coefficients: Vec<T>,
    pub standard_errors: Vec<T>,
    /// `sqrt(RSS / (n - q))`.
    pub residual_sd: T,
    /// `σ̂² (XᵀX)⁻¹`.
    pub covariance: Matrix<T>,
    pub n: usize,
    pub design_rank: usize,
    pub residuals: Vec<T>,
}

pub fn fit_ols<T: Scalar>(design: &Matrix<T>, response: &[T]) -> Result<LinearFit<T>> {
    let (n, q) = (design.rows(), design.cols());
    if response.len() != n {
        return Err(Error::InvalidInput(format!(
            "response length {} does not match {n} design rows",
            response.len()
        )));
    }
    if n <= q {
        return Err(Error::InsufficientData(format!(
            "least squares needs more rows than columns (n = {n}, q = {q})"
        )));
    }
    let qr = Qr::new(design);
    let coefficients = qr.solve(response)?;
    let fitted = design.matvec(&coefficients);
    let residuals: Vec<T> = response.iter().zip(&fitted).map(|(&y, &f)| y - f).collect();
    let rss: T = residuals.iter().map(|&r| r * r).sum();
    let sigma2 = rss / T::from_usize_lossy(n - q);
    let gram_inv = qr.gram_inverse()?;
    let standard_errors = (0..q).map(|j| (sigma2 * gram_inv[(j, j)]).sqrt()).collect();
    let covariance = scaled(&gram_inv, sigma2);
    Ok(LinearFit {
        coefficients,
        standard_errors,
        residual_sd: sigma2.sqrt(),
        covariance,
        n,
        design_rank: qr.rank(),
        residuals,
    })
}

pub(crate) fn scaled<T: Scalar>(m: &Matrix<T>, k: T) -> Matrix<T> {
    let mut out = m.clone();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[(i, j)] = m[(i, j)] * k;
        }
    }
    out
}
