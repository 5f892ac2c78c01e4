use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::paths::{estimate_paths, TestStatistics};
use super::report::{Method, MediationReport, Scale};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::regression::Family;
use crate::scalar::Scalar;
use crate::seed::stream_rng;

/// Maximum attempts per bootstrap replicate before giving up.
pub const MAX_RESAMPLE_ATTEMPTS: usize = 10;

/// How the threshold `λ_n` is derived from the configured `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaRule {
    /// `λ_n = lambda`.
    #[default]
    Fixed,
    /// `λ_n = lambda · √n / ln n`.
    RootNOverLogN,
}

/// Second term of the adaptive statistic, used when both indicators are on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularTerm {
    /// `α̂* β̂*`.
    #[default]
    Product,
    /// `(α̂* − α̂)(β̂* − β̂)`.
    CenteredProduct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbConfig {
    #[serde(rename = "B")]
    pub b: usize,
    pub lambda: f64,
    #[serde(default)]
    pub lambda_rule: LambdaRule,
    #[serde(default)]
    pub singular_term: SingularTerm,
    pub seed: u64,
    /// Exposure level `s`.
    pub s: f64,
    /// Reference exposure level `s*`.
    pub s_star: f64,
}

impl Default for AbConfig {
    fn default() -> Self {
        Self {
            b: 199,
            lambda: 2.0,
            lambda_rule: LambdaRule::Fixed,
            singular_term: SingularTerm::Product,
            seed: 0,
            s: 1.0,
            s_star: 0.0,
        }
    }
}

impl AbConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b < 19 {
            return Err(Error::InvalidInput(format!(
                "bootstrap tests need B >= 19, got {}",
                self.b
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if !(self.s.is_finite() && self.s_star.is_finite()) {
            return Err(Error::InvalidInput("exposure contrast must be finite".into()));
        }
        Ok(())
    }

    /// Threshold `λ_n` at sample size `n`.
    pub fn threshold(&self, n: usize) -> f64 {
        match self.lambda_rule {
            LambdaRule::Fixed => self.lambda,
            LambdaRule::RootNOverLogN => {
                let n = n as f64;
                self.lambda * n.sqrt() / n.ln()
            }
        }
    }

    pub fn contrast(&self) -> f64 {
        self.s - self.s_star
    }
}

/// Path estimates on one bootstrap resample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathDraw<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub se_alpha: T,
    pub se_beta: T,
}

/// `B` successful resamples plus the number of degenerate resamples that
/// were redrawn along the way.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapSample<T> {
    pub draws: Vec<PathDraw<T>>,
    pub redraws: usize,
}

pub(crate) fn resample_indices<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Nonparametric pairs bootstrap of the path estimates.
///
/// Replicate `k` draws from stream `k` of `seed`; a resample whose fit fails
/// is redrawn from the same stream, at most [`MAX_RESAMPLE_ATTEMPTS`] times.
pub fn bootstrap_paths<T: Scalar>(
    data: &Dataset<T>,
    outcome: Family,
    b: usize,
    seed: u64,
) -> Result<BootstrapSample<T>> {
    let n = data.n();
    let per_replicate: Vec<(PathDraw<T>, usize)> = (0..b)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            for attempt in 0..MAX_RESAMPLE_ATTEMPTS {
                let idx = resample_indices(&mut rng, n);
                match estimate_paths(&data.select_rows(&idx), outcome) {
                    Ok(st) if st.is_finite() => {
                        let draw = PathDraw {
                            alpha: st.alpha_hat,
                            beta: st.beta_hat,
                            gamma: st.gamma_hat,
                            se_alpha: st.se_alpha,
                            se_beta: st.se_beta,
                        };
                        return Ok((draw, attempt));
                    }
                    _ => continue,
                }
            }
            Err(Error::Estimation(format!(
                "bootstrap replicate {k}: {MAX_RESAMPLE_ATTEMPTS} consecutive degenerate resamples"
            )))
        })
        .collect::<Result<_>>()?;
    let redraws = per_replicate.iter().map(|&(_, r)| r).sum();
    let draws = per_replicate.into_iter().map(|(d, _)| d).collect();
    Ok(BootstrapSample { draws, redraws })
}

/// `|T*| ≤ λ` and `|T_obs| ≤ λ`.
pub fn ab_indicators(t_obs: f64, t_star: f64, lambda: f64) -> bool {
    t_star.abs() <= lambda && t_obs.abs() <= lambda
}

/// `U* = (α̂*β̂* − α̂β̂)(1 − I_α I_β) + α̂*β̂* I_α I_β`.
pub fn ab_statistic(
    alpha_star: f64,
    beta_star: f64,
    alpha_hat: f64,
    beta_hat: f64,
    ind_alpha: bool,
    ind_beta: bool,
) -> f64 {
    if ind_alpha && ind_beta {
        alpha_star * beta_star
    } else {
        alpha_star * beta_star - alpha_hat * beta_hat
    }
}

/// One bootstrap replicate of the adaptive test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BootstrapDraw {
    pub alpha_star: f64,
    pub beta_star: f64,
    pub t_alpha_star: f64,
    pub t_beta_star: f64,
    pub indicator_alpha: bool,
    pub indicator_beta: bool,
    pub u: f64,
}

fn sample_sd(x: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = x.clone().count() as f64;
    let mean = x.clone().sum::<f64>() / n;
    (x.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Standardised statistics, indicators and `U*` for every replicate.
///
/// A replicate without a usable standard error falls back to the standard
/// deviation of the bootstrap estimates.
pub fn ab_draws<T: Scalar>(
    stats: &TestStatistics<T>,
    sample: &BootstrapSample<T>,
    config: &AbConfig,
) -> Vec<BootstrapDraw> {
    let lambda = config.threshold(stats.n);
    let (a_hat, b_hat) = (stats.alpha_hat.to_f64_lossy(), stats.beta_hat.to_f64_lossy());
    let (t_a, t_b) = (stats.t_alpha.to_f64_lossy(), stats.t_beta.to_f64_lossy());
    let usable = |se: f64| se.is_finite() && se > 0.0;
    let needs_fallback = sample
        .draws
        .iter()
        .any(|d| !usable(d.se_alpha.to_f64_lossy()) || !usable(d.se_beta.to_f64_lossy()));
    let (sd_a, sd_b) = if needs_fallback {
        (
            sample_sd(sample.draws.iter().map(|d| d.alpha.to_f64_lossy())),
            sample_sd(sample.draws.iter().map(|d| d.beta.to_f64_lossy())),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    sample
        .draws
        .iter()
        .map(|d| {
            let (a, b) = (d.alpha.to_f64_lossy(), d.beta.to_f64_lossy());
            let (se_a, se_b) = (d.se_alpha.to_f64_lossy(), d.se_beta.to_f64_lossy());
            let t_alpha_star = a / if usable(se_a) { se_a } else { sd_a };
            let t_beta_star = b / if usable(se_b) { se_b } else { sd_b };
            let ia = ab_indicators(t_a, t_alpha_star, lambda);
            let ib = ab_indicators(t_b, t_beta_star, lambda);
            let u = match config.singular_term {
                SingularTerm::Product => ab_statistic(a, b, a_hat, b_hat, ia, ib),
                SingularTerm::CenteredProduct if ia && ib => (a - a_hat) * (b - b_hat),
                SingularTerm::CenteredProduct => a * b - a_hat * b_hat,
            };
            BootstrapDraw {
                alpha_star: a,
                beta_star: b,
                t_alpha_star,
                t_beta_star,
                indicator_alpha: ia,
                indicator_beta: ib,
                u,
            }
        })
        .collect()
}

/// `(1 + #{b : |x_b| ≥ |observed|}) / (B + 1)`.
pub fn bootstrap_p_value(centred: impl Iterator<Item = f64>, observed: f64) -> f64 {
    let mut b = 0usize;
    let mut count = 0usize;
    for x in centred {
        b += 1;
        if x.abs() >= observed.abs() {
            count += 1;
        }
    }
    (1 + count) as f64 / (b + 1) as f64
}

/// Both bootstrap tests from one shared set of resamples.
#[derive(Debug, Clone, Serialize)]
pub struct BootstrapAnalysis {
    pub stats: TestStatistics<f64>,
    pub classical: MediationReport,
    pub adaptive: MediationReport,
    pub draws: Vec<BootstrapDraw>,
    pub redraws: usize,
}

fn stats_to_f64<T: Scalar>(s: &TestStatistics<T>) -> TestStatistics<f64> {
    TestStatistics {
        alpha_hat: s.alpha_hat.to_f64_lossy(),
        beta_hat: s.beta_hat.to_f64_lossy(),
        gamma_hat: s.gamma_hat.to_f64_lossy(),
        se_alpha: s.se_alpha.to_f64_lossy(),
        se_beta: s.se_beta.to_f64_lossy(),
        se_gamma: s.se_gamma.to_f64_lossy(),
        cov_beta_gamma: s.cov_beta_gamma.to_f64_lossy(),
        t_alpha: s.t_alpha.to_f64_lossy(),
        t_beta: s.t_beta.to_f64_lossy(),
        n: s.n,
    }
}

/// Runs the classical and adaptive bootstrap tests on the same resamples.
pub fn bootstrap_tests<T: Scalar>(
    data: &Dataset<T>,
    outcome: Family,
    config: &AbConfig,
) -> Result<BootstrapAnalysis> {
    config.validate()?;
    let stats = estimate_paths(data, outcome)?;
    let sample = bootstrap_paths(data, outcome, config.b, config.seed)?;
    let draws = ab_draws(&stats, &sample, config);
    let st = stats_to_f64(&stats);
    let (ab_hat, g_hat) = (st.indirect(), st.gamma_hat);
    let total_hat = ab_hat + g_hat;

    let path = |d: &PathDraw<T>| {
        (
            d.alpha.to_f64_lossy() * d.beta.to_f64_lossy(),
            d.gamma.to_f64_lossy(),
        )
    };
    let p_nie_classical = bootstrap_p_value(sample.draws.iter().map(|d| path(d).0 - ab_hat), ab_hat);
    let p_nde = bootstrap_p_value(sample.draws.iter().map(|d| path(d).1 - g_hat), g_hat);
    let p_nte = bootstrap_p_value(
        sample.draws.iter().map(|d| {
            let (ab, g) = path(d);
            ab + g - total_hat
        }),
        total_hat,
    );
    let p_nie_ab = bootstrap_p_value(draws.iter().map(|d| d.u), ab_hat);

    let report = |method: Method, p_nie: f64, lambda: Option<f64>| {
        MediationReport::from_paths(
            &st,
            config.contrast(),
            [p_nie, p_nde, p_nte],
            method,
            config.b,
            lambda,
            config.seed,
            Scale::for_outcome(outcome),
        )
    };
    Ok(BootstrapAnalysis {
        classical: report(Method::ClassicalBootstrap, p_nie_classical, None),
        adaptive: report(Method::AdaptiveBootstrap, p_nie_ab, Some(config.threshold(st.n))),
        stats: st,
        draws,
        redraws: sample.redraws,
    })
}

/// Percentile-type pairs bootstrap test of the indirect, direct and total
/// effects.
pub fn classical_bootstrap_test<T: Scalar>(
    data: &Dataset<T>,
    outcome: Family,
    config: &AbConfig,
) -> Result<MediationReport> {
    Ok(bootstrap_tests(data, outcome, config)?.classical)
}

/// Adaptive bootstrap test; direct and total effects as in the classical
/// bootstrap.
pub fn ab_test<T: Scalar>(data: &Dataset<T>, outcome: Family, config: &AbConfig) -> Result<MediationReport> {
    Ok(bootstrap_tests(data, outcome, config)?.adaptive)
}
