use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::abtest::AbConfig;
use crate::data::{ColumnNames, Dataset};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::seed::{standard_normal, stream_rng};

/// Linear mediation design with a Bernoulli(0.5) exposure and two standard
/// normal confounders:
///
/// `M = α_I + α S + α_X·X + ε_M`, `Y = β_I + β M + γ S + β_X·X + ε_Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub alpha_intercept: f64,
    pub beta_intercept: f64,
    pub alpha_x: [f64; 2],
    pub beta_x: [f64; 2],
    pub sigma_m: f64,
    pub sigma_y: f64,
    pub n: usize,
    pub replications: usize,
    pub level: f64,
    pub ab: AbConfig,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.5,
            gamma: 1.0,
            alpha_intercept: 1.0,
            beta_intercept: 1.0,
            alpha_x: [1.0, 1.0],
            beta_x: [1.0, 1.0],
            sigma_m: 0.5,
            sigma_y: 0.5,
            n: 500,
            replications: 500,
            level: 0.05,
            ab: AbConfig::default(),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let reals = [
            self.alpha,
            self.beta,
            self.gamma,
            self.alpha_intercept,
            self.beta_intercept,
            self.alpha_x[0],
            self.alpha_x[1],
            self.beta_x[0],
            self.beta_x[1],
        ];
        if reals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("scenario coefficients must be finite".into()));
        }
        if !(self.sigma_m > 0.0 && self.sigma_y > 0.0 && self.sigma_m.is_finite() && self.sigma_y.is_finite()) {
            return Err(Error::InvalidInput("noise standard deviations must be positive".into()));
        }
        if self.n < 10 {
            return Err(Error::InvalidInput(format!("scenario needs n >= 10, got {}", self.n)));
        }
        if self.replications == 0 {
            return Err(Error::InvalidInput("scenario needs at least one replication".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidInput(format!("level must lie in (0, 1), got {}", self.level)));
        }
        self.ab.validate()
    }

    pub fn with_paths(self, alpha: f64, beta: f64) -> Self {
        Self { alpha, beta, ..self }
    }

    /// Shrinks `R` and `B` by `factor` for smoke runs (`B` stays at least 19,
    /// `R` at least 10).
    pub fn scaled(self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor <= 1.0) {
            return Err(Error::InvalidInput(format!("scale must lie in (0, 1], got {factor}")));
        }
        let shrink = |v: usize, floor: usize| ((v as f64 * factor).round() as usize).max(floor);
        let mut s = self;
        s.replications = shrink(self.replications, 10);
        s.ab.b = shrink(self.ab.b, 19);
        Ok(s)
    }
}

/// One dataset from the scenario; identical for equal seeds.
pub fn generate_scenario_data(s: &Scenario, replicate_seed: u64) -> Result<Dataset<f64>> {
    s.validate()?;
    let mut rng = stream_rng(replicate_seed, 0);
    let n = s.n;
    let (mut exp, mut med, mut out) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let mut x = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let si = if rng.random_bool(0.5) { 1.0 } else { 0.0 };
        let x1: f64 = standard_normal(&mut rng);
        let x2: f64 = standard_normal(&mut rng);
        let em: f64 = standard_normal(&mut rng);
        let ey: f64 = standard_normal(&mut rng);
        let m = s.alpha_intercept + s.alpha * si + s.alpha_x[0] * x1 + s.alpha_x[1] * x2 + s.sigma_m * em;
        let y = s.beta_intercept + s.beta * m + s.gamma * si + s.beta_x[0] * x1 + s.beta_x[1] * x2 + s.sigma_y * ey;
        exp.push(si);
        med.push(m);
        out.push(y);
        x.extend([x1, x2]);
    }
    Dataset::new(exp, med, out, Matrix::from_row_major(n, 2, x)?, ColumnNames::default_for(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exposure_is_fair_coin() {
        let s = Scenario { n: 100_000, ..Scenario::default() };
        let d = generate_scenario_data(&s, 1).unwrap();
        let mean = d.exposure().iter().sum::<f64>() / d.n() as f64;
        assert!((mean - 0.5).abs() < 0.006, "{mean}");
    }

    #[test]
    fn same_seed_same_data() {
        let s = Scenario { n: 50, ..Scenario::default() };
        assert_eq!(generate_scenario_data(&s, 9).unwrap(), generate_scenario_data(&s, 9).unwrap());
        assert_ne!(generate_scenario_data(&s, 9).unwrap(), generate_scenario_data(&s, 10).unwrap());
    }

    #[test]
    fn scaling_keeps_floors() {
        let s = Scenario::default().scaled(0.2).unwrap();
        assert_eq!((s.replications, s.ab.b), (100, 40));
        let s = Scenario::default().scaled(0.01).unwrap();
        assert_eq!((s.replications, s.ab.b), (10, 19));
        assert!(Scenario::default().scaled(0.0).is_err());
    }
}
