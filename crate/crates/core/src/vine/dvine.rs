use serde::{Deserialize, Serialize};

use super::pair::PairCopula;
use crate::error::{Error, Result};
use crate::gcopula::MarginalSpec;
use crate::regression::Family;
use crate::scalar::Scalar;

/// D-vine on the path order `x₀ – x₁ – … – x_k` under the simplifying
/// assumption.
///
/// `pairs[t][i]` is the tree-`t + 1` copula joining `xᵢ` and `x_{i+t+1}`
/// given the variables strictly between them. For conditional density and
/// quantile regression `x₀` is the response and `x₁..x_k` the covariates in
/// the caller's order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DVineSpec<T> {
    pub labels: Vec<String>,
    pub pairs: Vec<Vec<PairCopula<T>>>,
}

/// First and second arguments of every pair copula in the vine.
///
/// `first[t][i] = F(xᵢ | x_{i+1..i+t})` and
/// `second[t][j] = F(x_j | x_{j-t..j-1})`; tree `t + 1` edge `i` is evaluated
/// at `(first[t][i], second[t][i + t + 1])`.
#[derive(Debug, Clone)]
pub(crate) struct Recursion<T> {
    pub first: Vec<Vec<T>>,
    pub second: Vec<Vec<T>>,
}

impl<T: Scalar> DVineSpec<T> {
    pub fn new(labels: Vec<String>, pairs: Vec<Vec<PairCopula<T>>>) -> Result<Self> {
        let spec = Self { labels, pairs };
        spec.validate()?;
        Ok(spec)
    }

    /// All-independence vine on `dim` variables.
    pub fn independence(dim: usize) -> Self {
        let labels = (0..dim).map(|i| format!("x{i}")).collect();
        let pairs = (1..dim)
            .map(|t| vec![PairCopula::Independence; dim - t])
            .collect();
        Self { labels, pairs }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d < 2 {
            return Err(Error::InvalidInput("a vine needs at least two variables".into()));
        }
        if self.pairs.len() != d - 1 {
            return Err(Error::InvalidInput(format!(
                "a {d}-variable vine has {} trees, got {}",
                d - 1,
                self.pairs.len()
            )));
        }
        for (t, tree) in self.pairs.iter().enumerate() {
            if tree.len() != d - 1 - t {
                return Err(Error::InvalidInput(format!(
                    "tree {} needs {} copulas, got {}",
                    t + 1,
                    d - 1 - t,
                    tree.len()
                )));
            }
            for c in tree {
                c.validate()?;
            }
        }
        Ok(())
    }

    fn check_point(&self, u: &[T]) -> Result<()> {
        for &x in u {
            if !(x > T::zero() && x < T::one()) {
                return Err(Error::Domain(format!(
                    "vine arguments must lie strictly inside (0, 1), got {x}"
                )));
            }
        }
        Ok(())
    }

    /// h-function recursion over the first `u.len()` variables.
    pub(crate) fn recursion(&self, u: &[T]) -> Recursion<T> {
        let d = u.len();
        let nan = vec![T::nan(); d];
        let mut first = vec![u.to_vec()];
        let mut second = vec![u.to_vec()];
        for t in 0..d.saturating_sub(1) {
            let mut f = nan.clone();
            let mut s = nan.clone();
            for i in 0..d - t - 1 {
                let j = i + t + 1;
                let c = &self.pairs[t][i];
                let (a, b) = (first[t][i], second[t][j]);
                f[i] = c.h_unchecked(a, b);
                s[j] = c.h_unchecked(b, a);
            }
            first.push(f);
            second.push(s);
        }
        Recursion { first, second }
    }

    /// Joint copula log density at `u`.
    pub fn ln_density(&self, u: &[T]) -> Result<T> {
        if u.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "expected {} arguments, got {}",
                self.dim(),
                u.len()
            )));
        }
        self.check_point(u)?;
        let rec = self.recursion(u);
        let mut total = T::zero();
        for (t, tree) in self.pairs.iter().enumerate() {
            for (i, c) in tree.iter().enumerate() {
                total = total + c.ln_density_unchecked(rec.first[t][i], rec.second[t][i + t + 1]);
            }
        }
        Ok(total)
    }

    /// `c(v | u₁, …, u_k)`: product of the response-adjacent pair densities.
    pub fn conditional_density(&self, v: T, u: &[T]) -> Result<T> {
        let x = self.response_point(v, u)?;
        let rec = self.recursion(&x);
        let mut total = T::zero();
        for t in 0..u.len() {
            total = total + self.pairs[t][0].ln_density_unchecked(rec.first[t][0], rec.second[t][t + 1]);
        }
        Ok(total.exp())
    }

    /// `C⁻¹(α | u₁, …, u_k)` by a chain of inverse h-functions.
    pub fn conditional_quantile_uniform(&self, alpha: T, u: &[T]) -> Result<T> {
        let x = self.response_point(alpha, u)?;
        for tree in &self.pairs[..u.len()] {
            if let PairCopula::Gaussian { rho } = tree[0] {
                if !(rho.abs() < T::one()) {
                    return Err(Error::Domain("degenerate gaussian copula cannot be inverted".into()));
                }
            }
        }
        let rec = self.recursion(&x);
        let mut w = alpha;
        for t in (0..u.len()).rev() {
            w = self.pairs[t][0].h_inverse_unchecked(w, rec.second[t][t + 1]);
        }
        Ok(w)
    }

    /// Observed-scale conditional quantile `F_Y⁻¹(C⁻¹(α | F₁(x₁), …))`.
    ///
    /// Marginals must be continuous and carry no confounders.
    pub fn conditional_quantile(
        &self,
        alpha: T,
        x: &[T],
        response: &MarginalSpec<T>,
        covariates: &[MarginalSpec<T>],
    ) -> Result<T> {
        if covariates.len() != x.len() {
            return Err(Error::InvalidInput("one marginal per covariate is required".into()));
        }
        let u = x
            .iter()
            .zip(covariates)
            .map(|(&xi, m)| continuous_cdf(m, xi))
            .collect::<Result<Vec<_>>>()?;
        let w = self.conditional_quantile_uniform(alpha, &u)?;
        response.quantile(w, &[])
    }

    fn response_point(&self, v: T, u: &[T]) -> Result<Vec<T>> {
        if u.len() + 1 > self.dim() {
            return Err(Error::InvalidInput(format!(
                "at most {} covariates, got {}",
                self.dim() - 1,
                u.len()
            )));
        }
        let mut x = Vec::with_capacity(u.len() + 1);
        x.push(v);
        x.extend_from_slice(u);
        self.check_point(&x)?;
        Ok(x)
    }
}

pub(crate) fn check_continuous<T: Scalar>(m: &MarginalSpec<T>) -> Result<()> {
    if m.family != Family::Gaussian {
        return Err(Error::UnsupportedModel(
            "vine models require continuous marginals".into(),
        ));
    }
    Ok(())
}

pub(crate) fn continuous_cdf<T: Scalar>(m: &MarginalSpec<T>, x: T) -> Result<T> {
    check_continuous(m)?;
    m.cdf(x, &[])
}

/// Density of a DAG node given its ordered parents:
/// `c(F(x) | F(parents)) · f(x)`.
pub fn node_density<T: Scalar>(
    vine: &DVineSpec<T>,
    marginal: &MarginalSpec<T>,
    x: T,
    parents: &[(&MarginalSpec<T>, T)],
) -> Result<T> {
    let v = continuous_cdf(marginal, x)?;
    let u = parents
        .iter()
        .map(|&(m, p)| continuous_cdf(m, p))
        .collect::<Result<Vec<_>>>()?;
    let c = vine.conditional_density(v, &u)?;
    Ok(c * marginal.ln_density(x, &[])?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_vine_3(r01: f64, r12: f64, r02_1: f64) -> DVineSpec<f64> {
        DVineSpec::new(
            vec!["v".into(), "u1".into(), "u2".into()],
            vec![
                vec![PairCopula::gaussian(r01).unwrap(), PairCopula::gaussian(r12).unwrap()],
                vec![PairCopula::gaussian(r02_1).unwrap()],
            ],
        )
        .unwrap()
    }

    #[test]
    fn independence_vine_is_flat() {
        let vine = DVineSpec::<f64>::independence(4);
        assert_eq!(vine.conditional_density(0.3, &[0.2, 0.9, 0.5]).unwrap(), 1.0);
        assert_eq!(vine.ln_density(&[0.1, 0.2, 0.3, 0.4]).unwrap(), 0.0);
        let q = vine
            .conditional_quantile(0.9, &[3.0, -1.0, 0.0], &MarginalSpec::standard_normal(), &[
                MarginalSpec::standard_normal(),
                MarginalSpec::standard_normal(),
                MarginalSpec::standard_normal(),
            ])
            .unwrap();
        assert!((q - 1.281_551_565_544_6).abs() < 1e-10);
    }

    #[test]
    fn single_covariate_reduces_to_pair_density() {
        let vine = gaussian_vine_3(0.6, 0.3, 0.2);
        let c = PairCopula::gaussian(0.6).unwrap();
        let got = vine.conditional_density(0.3, &[0.8]).unwrap();
        assert!((got - c.density(0.3, 0.8).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn conditional_median_of_gaussian_pair() {
        let vine = gaussian_vine_3(0.6, 0.3, 0.2);
        let n01 = MarginalSpec::standard_normal();
        let q = vine.conditional_quantile(0.5, &[1.0], &n01, &[n01.clone()]).unwrap();
        assert!((q - 0.6).abs() < 1e-10);
    }

    #[test]
    fn quantile_inverts_conditional_cdf() {
        let vine = gaussian_vine_3(0.6, -0.3, 0.4);
        let u = [0.2, 0.7];
        let w = vine.conditional_quantile_uniform(0.35, &u).unwrap();
        let rec = vine.recursion(&[w, u[0], u[1]]);
        let f1 = vine.pairs[0][0].h_unchecked(w, u[0]);
        let f2 = vine.pairs[1][0].h_unchecked(f1, rec.second[1][2]);
        assert!((f2 - 0.35).abs() < 1e-10);
    }

    #[test]
    fn malformed_vine_is_rejected() {
        let err = DVineSpec::<f64>::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![PairCopula::Independence]],
        );
        assert!(err.is_err());
    }
}
