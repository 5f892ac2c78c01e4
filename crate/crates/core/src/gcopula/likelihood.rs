use super::spec::SemSpec;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{correlation_jacobian, dag_covariance, DagCoefficients, ErrorScales};
use crate::scalar::Scalar;
use crate::special::normal_cdf;

/// Latent-scale sufficient information for the copula part of the likelihood.
#[derive(Debug, Clone)]
pub(crate) enum LatentScores<T> {
    /// All three margins continuous: `Σ zᵢ zᵢᵀ` over observations.
    Continuous { scatter: [[T; 3]; 3], n: usize },
    /// Discrete exposure: its latent interval plus the two continuous scores.
    DiscreteExposure {
        lower: Vec<T>,
        upper: Vec<T>,
        z_m: Vec<T>,
        z_y: Vec<T>,
    },
}

fn check_pattern<T: Scalar>(spec: &SemSpec<T>) -> Result<()> {
    if spec.mediator.family.is_discrete() || spec.outcome.family.is_discrete() {
        return Err(Error::UnsupportedModel(
            "likelihood supports a discrete exposure only; mediator and outcome must be continuous"
                .into(),
        ));
    }
    Ok(())
}

fn check_data<T: Scalar>(spec: &SemSpec<T>, data: &Dataset<T>) -> Result<()> {
    if data.p() != spec.p() {
        return Err(Error::InvalidInput(format!(
            "spec expects {} confounders, data has {}",
            spec.p(),
            data.p()
        )));
    }
    Ok(())
}

/// Sum of the continuous marginal log densities plus the latent scores.
pub(crate) fn marginal_part<T: Scalar>(
    spec: &SemSpec<T>,
    data: &Dataset<T>,
) -> Result<(T, LatentScores<T>)> {
    check_pattern(spec)?;
    check_data(spec, data)?;
    let n = data.n();
    let mut total = T::zero();
    let mut z_m = Vec::with_capacity(n);
    let mut z_y = Vec::with_capacity(n);
    let mut z_s = Vec::with_capacity(n);
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let discrete = spec.exposure.family.is_discrete();
    if discrete {
        lower.reserve(n);
        upper.reserve(n);
    }
    for i in 0..n {
        let w = data.confounders().row(i);
        let (m, y, s) = (data.mediator()[i], data.outcome()[i], data.exposure()[i]);
        let mu_m = spec.mediator.mean_unchecked(w);
        let mu_y = spec.outcome.mean_unchecked(w);
        total = total + spec.mediator.ln_density_at(m, mu_m) + spec.outcome.ln_density_at(y, mu_y);
        z_m.push((m - mu_m) / spec.mediator.sd());
        z_y.push((y - mu_y) / spec.outcome.sd());
        let mu_s = spec.exposure.mean_unchecked(w);
        if discrete {
            spec.exposure.check_support(s)?;
            let (a, b) = spec.exposure.interval_at(s, mu_s);
            lower.push(a);
            upper.push(b);
        } else {
            total = total + spec.exposure.ln_density_at(s, mu_s);
            z_s.push((s - mu_s) / spec.exposure.sd());
        }
    }
    let scores = if discrete {
        LatentScores::DiscreteExposure { lower, upper, z_m, z_y }
    } else {
        let mut scatter = [[T::zero(); 3]; 3];
        for i in 0..n {
            let z = [z_s[i], z_m[i], z_y[i]];
            for a in 0..3 {
                for b in 0..3 {
                    scatter[a][b] = scatter[a][b] + z[a] * z[b];
                }
            }
        }
        LatentScores::Continuous { scatter, n }
    };
    Ok((total, scores))
}

fn corr_matrix<T: Scalar>(coeffs: &DagCoefficients<T>) -> Matrix<T> {
    let r = dag_covariance(coeffs, &ErrorScales::unit())
        .expect("unit scales are valid")
        .gamma_corr;
    Matrix::from_rows(&r.iter().map(|row| row.to_vec()).collect::<Vec<_>>())
        .expect("3x3 rows")
}

/// Copula part of the log-likelihood as a function of the DAG coefficients.
pub(crate) fn copula_loglik<T: Scalar>(coeffs: &DagCoefficients<T>, scores: &LatentScores<T>) -> T {
    if !coeffs.is_finite() {
        return T::neg_infinity();
    }
    let r = corr_matrix(coeffs);
    match scores {
        LatentScores::Continuous { scatter, n } => {
            let (Ok(inv), Ok(log_det)) = (r.spd_inverse(), r.spd_log_det()) else {
                return T::neg_infinity();
            };
            let mut quad = T::zero();
            for a in 0..3 {
                for b in 0..3 {
                    let id = if a == b { T::one() } else { T::zero() };
                    quad = quad + (inv[(a, b)] - id) * scatter[a][b];
                }
            }
            -T::half() * (T::from_usize_lossy(*n) * log_det + quad)
        }
        LatentScores::DiscreteExposure { lower, upper, z_m, z_y } => {
            let rho = r[(1, 2)];
            let v = T::one() - rho * rho;
            if !(v > T::zero()) {
                return T::neg_infinity();
            }
            let (r01, r02) = (r[(0, 1)], r[(0, 2)]);
            let w1 = (r01 - rho * r02) / v;
            let w2 = (r02 - rho * r01) / v;
            let cond_var = T::one() - (w1 * r01 + w2 * r02);
            if !(cond_var > T::zero()) {
                return T::neg_infinity();
            }
            let cond_sd = cond_var.sqrt();
            let half_ln_v = T::half() * v.ln();
            let mut total = T::zero();
            for i in 0..z_m.len() {
                let (zm, zy) = (z_m[i], z_y[i]);
                let ln_c23 = -half_ln_v
                    - (rho * rho * (zm * zm + zy * zy) - T::two() * rho * zm * zy) / (T::two() * v);
                let mu = w1 * zm + w2 * zy;
                let prob = interval_probability((lower[i] - mu) / cond_sd, (upper[i] - mu) / cond_sd);
                total = total + ln_c23 + prob.max(T::min_positive_value()).ln();
            }
            total
        }
    }
}

/// `P(lo <= Z < hi)` for standard normal `Z`, evaluated in the tail that
/// keeps relative precision.
pub(crate) fn interval_probability<T: Scalar>(lo: T, hi: T) -> T {
    if lo > T::zero() {
        normal_cdf(-lo) - normal_cdf(-hi)
    } else {
        normal_cdf(hi) - normal_cdf(lo)
    }
}

/// Analytic gradient of the all-continuous copula log-likelihood.
pub(crate) fn copula_gradient<T: Scalar>(
    coeffs: &DagCoefficients<T>,
    scores: &LatentScores<T>,
) -> Option<[T; 3]> {
    let LatentScores::Continuous { scatter, n } = scores else {
        return None;
    };
    let r = corr_matrix(coeffs);
    let inv = r.spd_inverse().ok()?;
    let s = Matrix::from_rows(&scatter.iter().map(|row| row.to_vec()).collect::<Vec<_>>()).ok()?;
    let middle = inv.matmul(&s).ok()?.matmul(&inv).ok()?;
    let nn = T::from_usize_lossy(*n);
    // d loglik / d rho_kl for (0,1), (0,2), (1,2)
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let d_rho: Vec<T> = pairs
        .iter()
        .map(|&(k, l)| -nn * inv[(k, l)] + middle[(k, l)])
        .collect();
    let jac = correlation_jacobian(coeffs);
    let mut grad = [T::zero(); 3];
    for (c, g) in grad.iter_mut().enumerate() {
        *g = (0..3).map(|r| d_rho[r] * jac[r][c]).sum();
    }
    Some(grad)
}

/// Joint log-likelihood `Σᵢ log f(sᵢ, mᵢ, yᵢ | wᵢ)`.
///
/// Supported patterns: all margins continuous, or a discrete exposure with a
/// continuous mediator and outcome.
pub fn loglik<T: Scalar>(spec: &SemSpec<T>, data: &Dataset<T>) -> Result<T> {
    spec.validate()?;
    let (marginal, scores) = marginal_part(spec, data)?;
    Ok(marginal + copula_loglik(&spec.coeffs, &scores))
}

/// Gradient of [`loglik`] in `(α, β, γ)`; all-continuous models only.
pub fn loglik_gradient<T: Scalar>(spec: &SemSpec<T>, data: &Dataset<T>) -> Result<[T; 3]> {
    spec.validate()?;
    let (_, scores) = marginal_part(spec, data)?;
    copula_gradient(&spec.coeffs, &scores).ok_or_else(|| {
        Error::UnsupportedModel("analytic gradient requires all-continuous margins".into())
    })
}
