use serde::{Deserialize, Serialize};

use super::marginal::MarginalSpec;
use crate::data::{ColumnNames, Dataset};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{dag_covariance, DagCoefficients, DagCovariance, ErrorScales};
use crate::scalar::Scalar;
use crate::seed::{standard_normal, stream_rng};

/// Gaussian copula SEM: three GLM marginals glued by the correlation matrix
/// implied by the DAG coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemSpec<T> {
    #[serde(rename = "coefficients")]
    pub coeffs: DagCoefficients<T>,
    pub exposure: MarginalSpec<T>,
    pub mediator: MarginalSpec<T>,
    pub outcome: MarginalSpec<T>,
}

impl<T: Scalar> SemSpec<T> {
    pub fn new(
        coeffs: DagCoefficients<T>,
        exposure: MarginalSpec<T>,
        mediator: MarginalSpec<T>,
        outcome: MarginalSpec<T>,
    ) -> Result<Self> {
        let spec = Self {
            coeffs,
            exposure,
            mediator,
            outcome,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Standard normal marginals with no confounders.
    pub fn standard_gaussian(coeffs: DagCoefficients<T>) -> Self {
        Self {
            coeffs,
            exposure: MarginalSpec::standard_normal(),
            mediator: MarginalSpec::standard_normal(),
            outcome: MarginalSpec::standard_normal(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for m in self.marginals() {
            m.validate()?;
        }
        if !self.coeffs.is_finite() {
            return Err(Error::InvalidInput("DAG coefficients must be finite".into()));
        }
        let p = self.exposure.p();
        if self.mediator.p() != p || self.outcome.p() != p {
            return Err(Error::InvalidInput(
                "all marginals must use the same confounders".into(),
            ));
        }
        Ok(())
    }

    pub fn marginals(&self) -> [&MarginalSpec<T>; 3] {
        [&self.exposure, &self.mediator, &self.outcome]
    }

    /// Number of confounders.
    pub fn p(&self) -> usize {
        self.exposure.p()
    }

    /// `Γ`, `Γ̃`, `τ_m`, `τ_y` under unit latent error scales.
    pub fn dependence(&self) -> DagCovariance<T> {
        dag_covariance(&self.coeffs, &ErrorScales::unit())
            .expect("unit scales and finite coefficients are always valid")
    }
}

/// One draw of the latent Gaussian DAG and its standardised versions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentTriple<T> {
    pub z_s: T,
    pub z_m: T,
    pub z_y: T,
    pub z_m_star: T,
    pub z_y_star: T,
}

/// `n` i.i.d. draws of `Z_s ~ N(0,1)`, `Z_m | Z_s ~ N(αZ_s, 1)`,
/// `Z_y | Z_s, Z_m ~ N(γZ_s + βZ_m, 1)`.
pub fn simulate_latent<T: Scalar>(
    coeffs: &DagCoefficients<T>,
    n: usize,
    seed: u64,
) -> Vec<LatentTriple<T>> {
    let dep = dag_covariance(coeffs, &ErrorScales::unit())
        .expect("unit scales are valid");
    let mut rng = stream_rng(seed, 0);
    (0..n)
        .map(|_| {
            let z_s: T = standard_normal(&mut rng);
            let z_m = coeffs.alpha * z_s + standard_normal::<T, _>(&mut rng);
            let z_y = coeffs.gamma * z_s + coeffs.beta * z_m + standard_normal::<T, _>(&mut rng);
            LatentTriple {
                z_s,
                z_m,
                z_y,
                z_m_star: z_m / dep.tau_m,
                z_y_star: z_y / dep.tau_y,
            }
        })
        .collect()
}

/// Observed `(S, M, Y)` from quantile transforms of the standardised latent
/// triple, with confounder-dependent marginal means.
pub fn simulate_dataset<T: Scalar>(
    spec: &SemSpec<T>,
    confounders: &Matrix<T>,
    seed: u64,
) -> Result<Dataset<T>> {
    spec.validate()?;
    if confounders.cols() != spec.p() {
        return Err(Error::InvalidInput(format!(
            "spec expects {} confounders, matrix has {}",
            spec.p(),
            confounders.cols()
        )));
    }
    let n = confounders.rows();
    if n == 0 {
        return Err(Error::InsufficientData("cannot simulate zero rows".into()));
    }
    let latent = simulate_latent(&spec.coeffs, n, seed);
    let mut s = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for (i, z) in latent.iter().enumerate() {
        let w = confounders.row(i);
        s.push(spec.exposure.from_latent(z.z_s, spec.exposure.mean_unchecked(w)));
        m.push(spec.mediator.from_latent(z.z_m_star, spec.mediator.mean_unchecked(w)));
        y.push(spec.outcome.from_latent(z.z_y_star, spec.outcome.mean_unchecked(w)));
    }
    Dataset::new(s, m, y, confounders.clone(), ColumnNames::default_for(spec.p()))
}

/// Simulation request as read from a TOML config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemConfig {
    pub seed: u64,
    pub n: usize,
    /// Number of i.i.d. standard normal confounder columns to generate.
    #[serde(default)]
    pub confounders: usize,
    #[serde(flatten)]
    pub sem: SemSpec<f64>,
}

impl SemConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.sem.validate()?;
        if cfg.sem.p() != cfg.confounders {
            return Err(Error::Config(format!(
                "marginal coefficient vectors imply {} confounders but config requests {}",
                cfg.sem.p(),
                cfg.confounders
            )));
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Generates the confounders (stream 1 of `seed`) and the dataset.
    pub fn simulate(&self) -> Result<Dataset<f64>> {
        let mut rng = stream_rng(self.seed, 1);
        let mut w = Matrix::zeros(self.n, self.confounders);
        for i in 0..self.n {
            for j in 0..self.confounders {
                w[(i, j)] = standard_normal(&mut rng);
            }
        }
        simulate_dataset(&self.sem, &w, self.seed)
    }
}
