use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::golden_section;
use crate::scalar::Scalar;
use crate::special::{normal_cdf, normal_quantile};

const CLAYTON_MAX: f64 = 50.0;
const CLAYTON_MIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairFamily {
    Independence,
    Gaussian,
    Clayton,
}

/// Bivariate copula. All members are exchangeable, so `h(u | v)` and
/// `h(v | u)` are the same function with swapped arguments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum PairCopula<T> {
    Independence,
    Gaussian { rho: T },
    Clayton { theta: T },
}

fn check_unit<T: Scalar>(name: &str, x: T) -> Result<()> {
    if x > T::zero() && x < T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie strictly inside (0, 1), got {x}")))
    }
}

// ln(u^-θ + v^-θ - 1) without overflow.
fn clayton_ln_a<T: Scalar>(theta: T, ln_u: T, ln_v: T) -> T {
    let a = -theta * ln_u;
    let b = -theta * ln_v;
    let m = a.max(b);
    if m < T::lit(30.0) {
        return (a.exp_m1() + b.exp_m1()).ln_1p();
    }
    m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln()
}

impl<T: Scalar> PairCopula<T> {
    pub fn gaussian(rho: T) -> Result<Self> {
        let c = Self::Gaussian { rho };
        c.validate()?;
        Ok(c)
    }

    pub fn clayton(theta: T) -> Result<Self> {
        let c = Self::Clayton { theta };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Independence => Ok(()),
            Self::Gaussian { rho } if rho.abs() < T::one() => Ok(()),
            Self::Gaussian { rho } => Err(Error::InvalidInput(format!(
                "gaussian copula needs |rho| < 1, got {rho}"
            ))),
            Self::Clayton { theta } if theta > T::zero() && theta.is_finite() => Ok(()),
            Self::Clayton { theta } => Err(Error::InvalidInput(format!(
                "clayton copula needs theta > 0, got {theta}"
            ))),
        }
    }

    pub fn family(&self) -> PairFamily {
        match self {
            Self::Independence => PairFamily::Independence,
            Self::Gaussian { .. } => PairFamily::Gaussian,
            Self::Clayton { .. } => PairFamily::Clayton,
        }
    }

    /// Dependence parameter; zero for the independence copula.
    pub fn parameter(&self) -> T {
        match *self {
            Self::Independence => T::zero(),
            Self::Gaussian { rho } => rho,
            Self::Clayton { theta } => theta,
        }
    }

    pub fn density(&self, u: T, v: T) -> Result<T> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        Ok(self.ln_density_unchecked(u, v).exp())
    }

    pub fn ln_density(&self, u: T, v: T) -> Result<T> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        Ok(self.ln_density_unchecked(u, v))
    }

    pub(crate) fn ln_density_unchecked(&self, u: T, v: T) -> T {
        match *self {
            Self::Independence => T::zero(),
            Self::Gaussian { rho } => {
                let (Ok(x), Ok(y)) = (normal_quantile(u), normal_quantile(v)) else {
                    return T::nan();
                };
                let s = T::one() - rho * rho;
                -T::half() * s.ln()
                    - (rho * rho * (x * x + y * y) - T::two() * rho * x * y) / (T::two() * s)
            }
            Self::Clayton { theta } => {
                let (lu, lv) = (u.ln(), v.ln());
                let ln_a = clayton_ln_a(theta, lu, lv);
                (T::one() + theta).ln() - (theta + T::one()) * (lu + lv)
                    - (T::one() / theta + T::two()) * ln_a
            }
        }
    }

    /// `h(u | v) = ∂C(u, v)/∂v`.
    pub fn h(&self, u: T, v: T) -> Result<T> {
        check_unit("u", u)?;
        check_unit("v", v)?;
        Ok(self.h_unchecked(u, v))
    }

    pub(crate) fn h_unchecked(&self, u: T, v: T) -> T {
        let out = match *self {
            Self::Independence => u,
            Self::Gaussian { rho } => {
                let (Ok(x), Ok(y)) = (normal_quantile(u), normal_quantile(v)) else {
                    return T::nan();
                };
                normal_cdf((x - rho * y) / (T::one() - rho * rho).sqrt())
            }
            Self::Clayton { theta } => {
                let (lu, lv) = (u.ln(), v.ln());
                let ln_a = clayton_ln_a(theta, lu, lv);
                (-(theta + T::one()) * lv - (T::one() / theta + T::one()) * ln_a).exp()
            }
        };
        clamp_open(out)
    }

    /// Inverse of `h(· | v)`: the `u` with `h(u | v) = w`.
    pub fn h_inverse(&self, w: T, v: T) -> Result<T> {
        check_unit("w", w)?;
        check_unit("v", v)?;
        Ok(self.h_inverse_unchecked(w, v))
    }

    pub(crate) fn h_inverse_unchecked(&self, w: T, v: T) -> T {
        let out = match *self {
            Self::Independence => w,
            Self::Gaussian { rho } => {
                let (Ok(x), Ok(y)) = (normal_quantile(w), normal_quantile(v)) else {
                    return T::nan();
                };
                normal_cdf(rho * y + (T::one() - rho * rho).sqrt() * x)
            }
            Self::Clayton { theta } => {
                // u = (v^-θ (w^(-θ/(1+θ)) - 1) + 1)^(-1/θ)
                let c = -theta / (theta + T::one()) * w.ln();
                let ln_term = -theta * v.ln() + c.exp_m1().ln();
                let ln_inner = if ln_term > T::lit(30.0) {
                    ln_term + (-ln_term).exp().ln_1p()
                } else {
                    ln_term.exp().ln_1p()
                };
                (-ln_inner / theta).exp()
            }
        };
        clamp_open(out)
    }
}

fn clamp_open<T: Scalar>(x: T) -> T {
    let tiny = T::min_positive_value();
    x.max(tiny).min(T::one() - T::epsilon() * T::half())
}

/// Fitted pair copula with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairFit<T> {
    pub copula: PairCopula<T>,
    pub std_error: T,
    /// The estimate sits at the edge of the parameter space.
    pub boundary: bool,
}

const GAUSSIAN_EDGE: f64 = 1.0 - 1e-9;

/// Maximum-likelihood pair-copula fit on pseudo-observations.
///
/// The gaussian family uses the normal-score correlation; clayton uses a
/// golden-section search of the profile on `(1e-4, 50)`.
pub fn fit_pair_copula<T: Scalar>(u: &[T], v: &[T], family: PairFamily) -> Result<PairFit<T>> {
    if u.len() != v.len() {
        return Err(Error::InvalidInput("pair samples differ in length".into()));
    }
    let n = u.len();
    if n < 10 {
        return Err(Error::InsufficientData(format!(
            "pair copula fit needs at least 10 observations, got {n}"
        )));
    }
    for (&a, &b) in u.iter().zip(v) {
        check_unit("u", a)?;
        check_unit("v", b)?;
    }
    let nn = T::from_usize_lossy(n);
    match family {
        PairFamily::Independence => Ok(PairFit {
            copula: PairCopula::Independence,
            std_error: T::zero(),
            boundary: false,
        }),
        PairFamily::Gaussian => {
            let (x, y) = normal_scores(u, v);
            let rho = score_correlation(&x, &y)?;
            let edge = T::lit(GAUSSIAN_EDGE);
            let boundary = rho.abs() >= edge;
            let rho = rho.max(-edge).min(edge);
            Ok(PairFit {
                copula: PairCopula::Gaussian { rho },
                std_error: (T::one() - rho * rho) / nn.sqrt(),
                boundary,
            })
        }
        PairFamily::Clayton => {
            let neg_ll = |theta: T| -> T {
                let c = PairCopula::Clayton { theta };
                -u.iter()
                    .zip(v)
                    .map(|(&a, &b)| c.ln_density_unchecked(a, b))
                    .sum::<T>()
            };
            let (lo, hi) = (T::lit(CLAYTON_MIN), T::lit(CLAYTON_MAX));
            let (theta, value) = golden_section(neg_ll, lo, hi, T::lit(1e-8));
            if !value.is_finite() {
                return Err(Error::Estimation("clayton likelihood is not finite".into()));
            }
            let step = (theta * T::lit(1e-3)).max(T::lit(1e-5));
            let curvature = (neg_ll(theta + step) - T::two() * value
                + neg_ll((theta - step).max(T::lit(1e-6))))
                / (step * step);
            let std_error = if curvature > T::zero() {
                T::one() / curvature.sqrt()
            } else {
                T::nan()
            };
            let slack = T::lit(1e-3);
            Ok(PairFit {
                copula: PairCopula::Clayton { theta },
                std_error,
                boundary: theta <= lo + slack || theta >= hi - slack,
            })
        }
    }
}

pub(crate) fn normal_scores<T: Scalar>(u: &[T], v: &[T]) -> (Vec<T>, Vec<T>) {
    let q = |p: T| normal_quantile(p).unwrap_or_else(|_| T::nan());
    (u.iter().map(|&a| q(a)).collect(), v.iter().map(|&b| q(b)).collect())
}

fn score_correlation<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    let sxy: T = x.iter().zip(y).map(|(&a, &b)| a * b).sum();
    let sxx: T = x.iter().map(|&a| a * a).sum();
    let syy: T = y.iter().map(|&b| b * b).sum();
    let denom = (sxx * syy).sqrt();
    if !(denom > T::zero()) || !denom.is_finite() {
        return Err(Error::Estimation("degenerate pseudo-observations".into()));
    }
    Ok(sxy / denom)
}
