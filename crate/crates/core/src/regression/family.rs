use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exponential-dispersion families supported by the marginal models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Bernoulli,
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Identity,
    Logit,
    Log,
}

impl Family {
    pub fn canonical_link(self) -> Link {
        match self {
            Family::Gaussian => Link::Identity,
            Family::Bernoulli => Link::Logit,
            Family::Poisson => Link::Log,
        }
    }

    pub fn is_discrete(self) -> bool {
        !matches!(self, Family::Gaussian)
    }

    pub(crate) fn check_link(self, link: Link) -> Result<()> {
        if link == self.canonical_link() {
            Ok(())
        } else {
            Err(Error::UnsupportedModel(format!(
                "only canonical links are supported; {self} requires {}",
                self.canonical_link()
            )))
        }
    }

    pub(crate) fn check_response<T: Scalar>(self, y: &[T]) -> Result<()> {
        let ok = match self {
            Family::Gaussian => y.iter().all(|v| v.is_finite()),
            Family::Bernoulli => y.iter().all(|&v| v == T::zero() || v == T::one()),
            Family::Poisson => y.iter().all(|&v| v >= T::zero() && v.fract() == T::zero() && v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "response values outside the support of the {self} family"
            )))
        }
    }

    /// Variance function `V(μ)`.
    pub(crate) fn variance<T: Scalar>(self, mu: T) -> T {
        match self {
            Family::Gaussian => T::one(),
            Family::Bernoulli => mu * (T::one() - mu),
            Family::Poisson => mu,
        }
    }

    /// Unit deviance summed over observations.
    pub(crate) fn deviance<T: Scalar>(self, y: &[T], mu: &[T]) -> T {
        let two = T::two();
        y.iter()
            .zip(mu)
            .map(|(&y, &m)| match self {
                Family::Gaussian => (y - m) * (y - m),
                Family::Bernoulli => {
                    if y == T::one() {
                        -two * m.ln()
                    } else {
                        -two * (T::one() - m).ln()
                    }
                }
                Family::Poisson => {
                    let t = if y > T::zero() { y * (y / m).ln() } else { T::zero() };
                    two * (t - (y - m))
                }
            })
            .sum()
    }

    pub(crate) fn initial_mean<T: Scalar>(self, y: T) -> T {
        match self {
            Family::Gaussian => y,
            Family::Bernoulli => (y + T::half()) / T::two(),
            Family::Poisson => y + T::lit(0.1),
        }
    }
}

impl Link {
    pub fn link<T: Scalar>(self, mu: T) -> T {
        match self {
            Link::Identity => mu,
            Link::Logit => (mu / (T::one() - mu)).ln(),
            Link::Log => mu.ln(),
        }
    }

    pub fn inverse<T: Scalar>(self, eta: T) -> T {
        match self {
            Link::Identity => eta,
            Link::Logit => {
                if eta >= T::zero() {
                    T::one() / (T::one() + (-eta).exp())
                } else {
                    let e = eta.exp();
                    e / (T::one() + e)
                }
            }
            Link::Log => eta.exp(),
        }
    }

    /// `dμ/dη`.
    pub(crate) fn mu_eta<T: Scalar>(self, eta: T) -> T {
        match self {
            Link::Identity => T::one(),
            Link::Logit => {
                let m = self.inverse(eta);
                m * (T::one() - m)
            }
            Link::Log => eta.exp(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Gaussian => "gaussian",
            Family::Bernoulli => "bernoulli",
            Family::Poisson => "poisson",
        })
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Link::Identity => "identity",
            Link::Logit => "logit",
            Link::Log => "log",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Family::Gaussian),
            "bernoulli" | "binomial" => Ok(Family::Bernoulli),
            "poisson" => Ok(Family::Poisson),
            other => Err(Error::InvalidInput(format!("unknown family '{other}'"))),
        }
    }
}
