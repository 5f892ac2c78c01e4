//! Least squares and generalized linear model fitting.

mod family;
mod glm;
mod ols;

pub use family::{Family, Link};
pub use glm::{fit_glm, fit_glm_with, GlmFit, IrlsOptions};
pub use ols::{fit_ols, LinearFit};
