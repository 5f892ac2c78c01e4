//! Sobel, classical bootstrap and adaptive bootstrap tests of mediation
//! effects in the linear (or GLM-outcome) mediation model.

mod bootstrap;
mod paths;
mod report;

pub use bootstrap::{
    ab_draws, ab_indicators, ab_statistic, ab_test, bootstrap_p_value, bootstrap_paths, bootstrap_tests,
    classical_bootstrap_test, AbConfig, BootstrapAnalysis, BootstrapDraw, BootstrapSample, LambdaRule,
    PathDraw, SingularTerm, MAX_RESAMPLE_ATTEMPTS,
};
pub use paths::{estimate_paths, mediator_path, sobel_test, SobelTest, TestStatistics};
pub use report::{sobel_report, MediationReport, Method, Scale};
