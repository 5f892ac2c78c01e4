use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regression::{Family, Link};
use crate::scalar::Scalar;
use crate::special::{
    ln_normal_pdf, normal_cdf, normal_quantile_ext, poisson_cdf, poisson_ln_pmf, poisson_quantile,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginalKind {
    Continuous,
    Discrete,
}

/// Exponential-dispersion marginal whose mean follows a GLM in the
/// confounders: `g(μ) = [1, w]ᵀ β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalSpec<T> {
    pub family: Family,
    pub link: Link,
    /// Intercept first, then one coefficient per confounder.
    pub confounder_coeffs: Vec<T>,
    /// `φ`; the variance for the gaussian family, fixed at 1 otherwise.
    pub dispersion: T,
}

impl<T: Scalar> MarginalSpec<T> {
    pub fn new(family: Family, confounder_coeffs: Vec<T>, dispersion: T) -> Result<Self> {
        let spec = Self {
            family,
            link: family.canonical_link(),
            confounder_coeffs,
            dispersion,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn standard_normal() -> Self {
        Self {
            family: Family::Gaussian,
            link: Link::Identity,
            confounder_coeffs: vec![T::zero()],
            dispersion: T::one(),
        }
    }

    pub fn gaussian(mean: T, sd: T) -> Self {
        Self {
            family: Family::Gaussian,
            link: Link::Identity,
            confounder_coeffs: vec![mean],
            dispersion: sd * sd,
        }
    }

    pub fn bernoulli(prob: T) -> Self {
        Self {
            family: Family::Bernoulli,
            link: Link::Logit,
            confounder_coeffs: vec![Link::Logit.link(prob)],
            dispersion: T::one(),
        }
    }

    pub fn poisson(mean: T) -> Self {
        Self {
            family: Family::Poisson,
            link: Link::Log,
            confounder_coeffs: vec![mean.ln()],
            dispersion: T::one(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.family.check_link(self.link)?;
        if self.confounder_coeffs.is_empty() {
            return Err(Error::InvalidInput("marginal needs at least an intercept".into()));
        }
        if !(self.dispersion > T::zero() && self.dispersion.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "dispersion must be positive, got {}",
                self.dispersion
            )));
        }
        Ok(())
    }

    pub fn kind(&self) -> MarginalKind {
        if self.family.is_discrete() {
            MarginalKind::Discrete
        } else {
            MarginalKind::Continuous
        }
    }

    /// Number of confounders this marginal expects.
    pub fn p(&self) -> usize {
        self.confounder_coeffs.len() - 1
    }

    pub fn sd(&self) -> T {
        self.dispersion.sqrt()
    }

    pub fn mean(&self, confounders: &[T]) -> Result<T> {
        if confounders.len() != self.p() {
            return Err(Error::InvalidInput(format!(
                "marginal expects {} confounders, got {}",
                self.p(),
                confounders.len()
            )));
        }
        Ok(self.mean_unchecked(confounders))
    }

    pub(crate) fn mean_unchecked(&self, confounders: &[T]) -> T {
        let eta = self.confounder_coeffs[0]
            + self.confounder_coeffs[1..]
                .iter()
                .zip(confounders)
                .map(|(&b, &w)| b * w)
                .sum::<T>();
        self.link.inverse(eta)
    }

    pub(crate) fn check_support(&self, value: T) -> Result<()> {
        let ok = match self.family {
            Family::Gaussian => value.is_finite(),
            Family::Bernoulli => value == T::zero() || value == T::one(),
            Family::Poisson => value >= T::zero() && value.fract() == T::zero() && value.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("value {value} outside the {} support", self.family)))
        }
    }

    /// Marginal CDF `F(value | w)`.
    pub fn cdf(&self, value: T, confounders: &[T]) -> Result<T> {
        self.check_support(value)?;
        let mu = self.mean(confounders)?;
        Ok(self.cdf_at(value, mu))
    }

    pub(crate) fn cdf_at(&self, value: T, mu: T) -> T {
        match self.family {
            Family::Gaussian => normal_cdf((value - mu) / self.sd()),
            Family::Bernoulli => {
                if value < T::zero() {
                    T::zero()
                } else if value < T::one() {
                    T::one() - mu
                } else {
                    T::one()
                }
            }
            Family::Poisson => T::lit(poisson_cdf(value.to_f64_lossy(), mu.to_f64_lossy())),
        }
    }

    /// Generalised inverse `inf{x : F(x | w) >= p}`.
    pub fn quantile(&self, p: T, confounders: &[T]) -> Result<T> {
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::Domain(format!("quantile level must lie in (0, 1), got {p}")));
        }
        let mu = self.mean(confounders)?;
        Ok(self.quantile_at(p, mu))
    }

    pub(crate) fn quantile_at(&self, p: T, mu: T) -> T {
        match self.family {
            Family::Gaussian => mu + self.sd() * normal_quantile_ext(p),
            Family::Bernoulli => {
                if p <= T::one() - mu {
                    T::zero()
                } else {
                    T::one()
                }
            }
            Family::Poisson => T::lit(poisson_quantile(p.to_f64_lossy(), mu.to_f64_lossy())),
        }
    }

    /// Log density (continuous) or log probability mass (discrete).
    pub fn ln_density(&self, value: T, confounders: &[T]) -> Result<T> {
        self.check_support(value)?;
        let mu = self.mean(confounders)?;
        Ok(self.ln_density_at(value, mu))
    }

    pub(crate) fn ln_density_at(&self, value: T, mu: T) -> T {
        match self.family {
            Family::Gaussian => {
                let sd = self.sd();
                ln_normal_pdf((value - mu) / sd) - sd.ln()
            }
            Family::Bernoulli => {
                if value == T::one() {
                    mu.ln()
                } else {
                    (T::one() - mu).ln()
                }
            }
            Family::Poisson => T::lit(poisson_ln_pmf(value.to_f64_lossy(), mu.to_f64_lossy())),
        }
    }

    /// Latent interval `[Φ⁻¹(F(s − 1)), Φ⁻¹(F(s)))` equivalent to `{X = s}`.
    pub fn discrete_interval(&self, s: T, confounders: &[T]) -> Result<(T, T)> {
        if self.kind() != MarginalKind::Discrete {
            return Err(Error::InvalidInput("latent intervals apply to discrete marginals only".into()));
        }
        self.check_support(s)?;
        let mu = self.mean(confounders)?;
        Ok(self.interval_at(s, mu))
    }

    pub(crate) fn interval_at(&self, s: T, mu: T) -> (T, T) {
        let lower = if s <= T::zero() {
            T::neg_infinity()
        } else {
            normal_quantile_ext(self.cdf_at(s - T::one(), mu))
        };
        let upper = normal_quantile_ext(self.cdf_at(s, mu));
        (lower, upper)
    }

    /// Observed value for a latent standard-normal score.
    pub(crate) fn from_latent(&self, z: T, mu: T) -> T {
        match self.family {
            Family::Gaussian => mu + self.sd() * z,
            _ => {
                let u = normal_cdf(z).max(T::min_positive_value()).min(T::one() - T::epsilon());
                self.quantile_at(u, mu)
            }
        }
    }
}
