use serde::{Deserialize, Serialize};

use super::paths::{direct_wald_test, estimate_paths, sobel_test, total_delta_test, TestStatistics};
use crate::data::Dataset;
use crate::error::Result;
use crate::regression::Family;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sobel,
    ClassicalBootstrap,
    AdaptiveBootstrap,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Sobel => "sobel",
            Method::ClassicalBootstrap => "classical_bootstrap",
            Method::AdaptiveBootstrap => "adaptive_bootstrap",
        }
    }
}

/// Scale of the reported effects: the response scale for a gaussian
/// outcome, the coefficient (link) scale otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Natural,
    Link,
}

impl Scale {
    pub fn for_outcome(family: Family) -> Self {
        match family {
            Family::Gaussian => Scale::Natural,
            _ => Scale::Link,
        }
    }
}

/// Indirect, direct and total effects of changing the exposure from `s*` to
/// `s`, with one p-value per effect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediationReport {
    #[serde(rename = "NIE")]
    pub nie: f64,
    #[serde(rename = "NDE")]
    pub nde: f64,
    #[serde(rename = "NTE")]
    pub nte: f64,
    #[serde(rename = "p_value_NIE")]
    pub p_value_nie: f64,
    #[serde(rename = "p_value_NDE")]
    pub p_value_nde: f64,
    #[serde(rename = "p_value_NTE")]
    pub p_value_nte: f64,
    pub method: Method,
    pub n: usize,
    /// Bootstrap replicates; 0 for the Sobel test.
    #[serde(rename = "B")]
    pub b: usize,
    /// Threshold used by the adaptive test, `null` otherwise.
    pub lambda: Option<f64>,
    pub seed: u64,
    pub scale: Scale,
}

impl MediationReport {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_paths(
        stats: &TestStatistics<f64>,
        contrast: f64,
        p_values: [f64; 3],
        method: Method,
        b: usize,
        lambda: Option<f64>,
        seed: u64,
        scale: Scale,
    ) -> Self {
        let nie = stats.indirect() * contrast;
        let nde = stats.gamma_hat * contrast;
        let [p_value_nie, p_value_nde, p_value_nte] = p_values;
        Self {
            nie,
            nde,
            nte: nie + nde,
            p_value_nie,
            p_value_nde,
            p_value_nte,
            method,
            n: stats.n,
            b,
            lambda,
            seed,
            scale,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// Sobel test of the indirect effect with Wald and delta-method tests of the
/// direct and total effects.
pub fn sobel_report<T: Scalar>(
    data: &Dataset<T>,
    outcome: Family,
    s: f64,
    s_star: f64,
) -> Result<MediationReport> {
    let st = estimate_paths(data, outcome)?;
    let p = [
        sobel_test(&st).p_value,
        direct_wald_test(&st).p_value,
        total_delta_test(&st).p_value,
    ];
    let st = TestStatistics {
        alpha_hat: st.alpha_hat.to_f64_lossy(),
        beta_hat: st.beta_hat.to_f64_lossy(),
        gamma_hat: st.gamma_hat.to_f64_lossy(),
        se_alpha: st.se_alpha.to_f64_lossy(),
        se_beta: st.se_beta.to_f64_lossy(),
        se_gamma: st.se_gamma.to_f64_lossy(),
        cov_beta_gamma: st.cov_beta_gamma.to_f64_lossy(),
        t_alpha: st.t_alpha.to_f64_lossy(),
        t_beta: st.t_beta.to_f64_lossy(),
        n: st.n,
    };
    Ok(MediationReport::from_paths(
        &st,
        s - s_star,
        p,
        Method::Sobel,
        0,
        None,
        0,
        Scale::for_outcome(outcome),
    ))
}
